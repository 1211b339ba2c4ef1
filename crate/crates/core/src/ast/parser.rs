//! Recursive-descent parser for the subset of Java that method bodies use.
//!
//! Declarations are parsed strictly; a statement inside a method body that
//! the grammar does not cover is consumed up to its terminating `;` (or its
//! closing brace) and kept as an `UnknownStmt` holding its identifier and
//! literal leaves.

use super::lexer::{tokenize, Tok, TokKind};
use super::{AstNode, MethodAst, ParseError};

type PResult<T> = Result<T, ParseError>;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

const RESERVED: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

pub struct Parser<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    file: String,
    methods: Vec<MethodAst>,
    /// Nesting depth of method/initializer bodies; methods are only collected
    /// at depth zero.
    body_depth: usize,
    no_lambda: bool,
}

/// Parses a compilation unit (or a bare class body / method fragment) and
/// returns its methods in source order. Constructors, initializer blocks and
/// field initializers are not methods.
pub fn parse_methods(source: &str) -> Result<Vec<MethodAst>, ParseError> {
    parse_file("", source)
}

pub fn parse_file(path: &str, source: &str) -> Result<Vec<MethodAst>, ParseError> {
    let mut p = Parser {
        toks: tokenize(source)?,
        pos: 0,
        file: path.to_string(),
        methods: Vec::new(),
        body_depth: 0,
        no_lambda: false,
    };
    p.compilation_unit()?;
    Ok(p.methods)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Tok<'a> {
        self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> Tok<'a> {
        self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn at(&self, text: &str) -> bool {
        let t = self.peek();
        t.text == text && t.kind != TokKind::Str
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokKind::Eof
    }

    fn bump(&mut self) -> Tok<'a> {
        let t = self.peek();
        if t.kind != TokKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = self.peek();
        let found = if t.kind == TokKind::Eof { "end of input".to_string() } else { format!("{:?}", t.text) };
        Err(ParseError::new(t.start, format!("{}, found {found}", msg.into())))
    }

    fn expect(&mut self, text: &str) -> PResult<Tok<'a>> {
        if self.eat(text) {
            Ok(self.toks[self.pos - 1])
        } else {
            self.error(format!("expected {text:?}"))
        }
    }

    fn is_ident(&self) -> bool {
        let t = self.peek();
        t.kind == TokKind::Ident && !is_reserved(t.text)
    }

    fn expect_ident(&mut self) -> PResult<Tok<'a>> {
        if self.is_ident() {
            Ok(self.bump())
        } else {
            self.error("expected identifier")
        }
    }

    fn span_from(&self, start: usize) -> (usize, usize) {
        let s = self.toks[start].start;
        let e = if self.pos > start { self.toks[self.pos - 1].end } else { s };
        (s, e)
    }

    fn adjacent(&self, n: usize) -> bool {
        self.peek_at(n).start == self.peek_at(n - 1).end
    }

    // ---------------------------------------------------------------- decls

    fn compilation_unit(&mut self) -> PResult<()> {
        while !self.at_eof() {
            if self.at("package") || self.at("import") {
                while !self.eat(";") {
                    if self.at_eof() {
                        return self.error("expected \";\"");
                    }
                    self.bump();
                }
                continue;
            }
            self.member(None)?;
        }
        Ok(())
    }

    fn skip_annotation(&mut self) -> PResult<()> {
        self.expect("@")?;
        self.expect_ident()?;
        while self.at(".") && self.peek_at(1).kind == TokKind::Ident {
            self.bump();
            self.bump();
        }
        if self.at("(") {
            self.skip_balanced("(", ")")?;
        }
        Ok(())
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        let start = self.peek().start;
        self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() {
                return Err(ParseError::new(start, format!("unbalanced {open:?}")));
            }
            let t = self.bump();
            if t.kind == TokKind::Punct {
                if t.text == open {
                    depth += 1;
                } else if t.text == close {
                    depth -= 1;
                }
            }
        }
        Ok(())
    }

    fn modifiers(&mut self) -> PResult<()> {
        loop {
            if self.at("@") && !(self.peek_at(1).text == "interface") {
                self.skip_annotation()?;
            } else if MODIFIERS.contains(&self.peek().text) && self.peek().kind == TokKind::Ident {
                // `default:` inside a switch never reaches here
                self.bump();
            } else if self.at("non") && self.peek_at(1).text == "-" && self.peek_at(2).text == "sealed" {
                self.pos += 3;
            } else {
                return Ok(());
            }
        }
    }

    fn at_type_decl(&self) -> bool {
        let t = self.peek();
        match t.text {
            "class" | "interface" | "enum" => t.kind == TokKind::Ident,
            "record" => {
                self.peek_at(1).kind == TokKind::Ident
                    && self.peek_at(2).text != "="
                    && matches!(self.peek_at(2).text, "(" | "<")
            }
            "@" => self.peek_at(1).text == "interface",
            _ => false,
        }
    }

    fn type_decl(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let kw = self.bump();
        if kw.text == "@" {
            self.bump();
        }
        let name = self.expect_ident()?;
        let mut children = vec![AstNode::leaf("SimpleName", name.text, (name.start, name.end))];
        if self.at("<") {
            self.skip_balanced("<", ">")?;
        }
        if kw.text == "record" {
            children.extend(self.formal_params()?.into_iter().flat_map(|p| p.children));
        }
        while !self.at("{") {
            if self.at_eof() {
                return self.error("expected class body");
            }
            self.bump();
        }
        children.extend(self.class_body(kw.text == "enum", kw.text == "record")?);
        Ok(AstNode::interior("ClassOrInterfaceDeclaration", self.span_from(start), children))
    }

    fn class_body(&mut self, is_enum: bool, is_record: bool) -> PResult<Vec<AstNode>> {
        let open = self.expect("{")?;
        let mut members = Vec::new();
        if is_enum {
            loop {
                if self.eat(";") || self.at("}") {
                    break;
                }
                let start = self.pos;
                while self.at("@") {
                    self.skip_annotation()?;
                }
                let name = self.expect_ident()?;
                let mut children = vec![AstNode::leaf("SimpleName", name.text, (name.start, name.end))];
                if self.at("(") {
                    children.extend(self.arguments()?);
                }
                if self.at("{") {
                    children.extend(self.class_body(false, false)?);
                }
                members.push(AstNode::interior("EnumConstantDeclaration", self.span_from(start), children));
                if !self.eat(",") {
                    if !self.at("}") {
                        self.expect(";")?;
                    }
                    break;
                }
            }
        }
        while !self.eat("}") {
            if self.at_eof() {
                return Err(ParseError::new(open.start, "unterminated class body"));
            }
            members.extend(self.member(Some(is_record))?);
        }
        Ok(members)
    }

    /// One class member. `in_record` is `None` at top level.
    fn member(&mut self, in_record: Option<bool>) -> PResult<Option<AstNode>> {
        if self.eat(";") {
            return Ok(None);
        }
        let start = self.pos;
        self.modifiers()?;
        if self.at("{") {
            self.body_depth += 1;
            let body = self.block();
            self.body_depth -= 1;
            return Ok(Some(AstNode::interior("InitializerDeclaration", self.span_from(start), vec![body?])));
        }
        if self.at_type_decl() {
            return self.type_decl().map(Some);
        }
        if self.at("<") {
            self.skip_balanced("<", ">")?;
        }
        // constructor, or a record's compact constructor
        if self.is_ident() && (self.peek_at(1).text == "(" || (in_record == Some(true) && self.peek_at(1).text == "{"))
        {
            let name = self.bump();
            let mut children = vec![AstNode::leaf("SimpleName", name.text, (name.start, name.end))];
            if self.at("(") {
                children.extend(self.formal_params()?.into_iter().flat_map(|p| p.children));
            }
            children.extend(self.throws_clause()?);
            self.body_depth += 1;
            let body = self.block();
            self.body_depth -= 1;
            children.push(body?);
            return Ok(Some(AstNode::interior("ConstructorDeclaration", self.span_from(start), children)));
        }
        let type_start = self.pos;
        let ty = self.parse_type()?;
        let name = self.expect_ident()?;
        if self.at("(") {
            return self.method_rest(type_start, ty, name).map(Some);
        }
        // field
        let mut children = vec![ty];
        self.body_depth += 1;
        let decls = self.declarators(name);
        self.body_depth -= 1;
        children.extend(decls?);
        self.expect(";")?;
        Ok(Some(AstNode::interior("FieldDeclaration", self.span_from(start), children)))
    }

    fn throws_clause(&mut self) -> PResult<Vec<AstNode>> {
        let mut out = Vec::new();
        if self.eat("throws") {
            loop {
                out.push(self.parse_type()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn method_rest(&mut self, type_start: usize, ty: AstNode, name: Tok<'a>) -> PResult<AstNode> {
        let params = self.formal_params()?;
        while self.at("[") && self.peek_at(1).text == "]" {
            self.pos += 2;
        }
        let signature = params.iter().map(|p| p.token.clone().unwrap_or_default()).collect::<Vec<_>>();
        let mut children = vec![ty, AstNode::leaf("SimpleName", name.text, (name.start, name.end))];
        children.extend(params.into_iter().map(|p| p.children.into_iter().next().unwrap()));
        children.extend(self.throws_clause()?);
        if self.eat("default") {
            // annotation element default value
            self.expression_or_initializer()?;
        }
        if self.at("{") {
            self.body_depth += 1;
            let body = self.block();
            self.body_depth -= 1;
            children.push(body?);
        } else {
            self.expect(";")?;
        }
        let node = AstNode::interior("MethodDeclaration", self.span_from(type_start), children);
        if self.body_depth == 0 {
            if let Some(root) = node.clone().prune() {
                self.methods.push(MethodAst {
                    name: name.text.to_string(),
                    signature,
                    root,
                    source_file: self.file.clone(),
                });
            }
        }
        Ok(node)
    }

    /// Returns one wrapper per parameter: the wrapper's token carries the
    /// normalized type text and its single child is the `Parameter` node.
    fn formal_params(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        loop {
            let start = self.pos;
            self.modifiers()?;
            let type_start = self.pos;
            let ty = self.parse_type()?;
            let mut type_text = self.text_between(type_start, self.pos);
            if self.eat("...") {
                type_text.push_str("...");
            }
            let name = if self.at("this") { self.bump() } else { self.expect_ident()? };
            while self.at("[") && self.peek_at(1).text == "]" {
                self.pos += 2;
                type_text.push_str("[]");
            }
            let param = AstNode::interior(
                "Parameter",
                self.span_from(start),
                vec![ty, AstNode::leaf("SimpleName", name.text, (name.start, name.end))],
            );
            out.push(AstNode { kind: String::new(), token: Some(type_text), children: vec![param], span: (0, 0) });
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn text_between(&self, from: usize, to: usize) -> String {
        let mut s = String::new();
        let mut i = from;
        while i < to {
            if self.toks[i].text == "@" {
                // drop type annotations from signatures
                i += 2;
                continue;
            }
            s.push_str(self.toks[i].text);
            i += 1;
        }
        s
    }

    // ---------------------------------------------------------------- types

    fn at_type_start(&self) -> bool {
        let t = self.peek();
        t.kind == TokKind::Ident && (PRIMITIVES.contains(&t.text) || t.text == "void" || !is_reserved(t.text))
    }

    fn parse_type(&mut self) -> PResult<AstNode> {
        let ty = self.parse_base_type()?;
        Ok(self.array_dims(ty))
    }

    fn array_dims(&mut self, mut ty: AstNode) -> AstNode {
        while self.at("[") && self.peek_at(1).text == "]" {
            let start = ty.span.0;
            self.pos += 2;
            let end = self.toks[self.pos - 1].end;
            ty = AstNode::interior("ArrayType", (start, end), vec![ty]);
        }
        ty
    }

    fn parse_base_type(&mut self) -> PResult<AstNode> {
        while self.at("@") {
            self.skip_annotation()?;
        }
        let start = self.pos;
        let t = self.peek();
        if t.kind == TokKind::Ident && PRIMITIVES.contains(&t.text) {
            self.bump();
            return Ok(AstNode::leaf("PrimitiveType", t.text, (t.start, t.end)));
        }
        if t.kind == TokKind::Ident && t.text == "void" {
            self.bump();
            return Ok(AstNode::leaf("VoidType", t.text, (t.start, t.end)));
        }
        if self.at("?") {
            self.bump();
            let mut children = Vec::new();
            if self.eat("extends") || self.eat("super") {
                children.push(self.parse_type()?);
            }
            return Ok(if children.is_empty() {
                AstNode::leaf("WildcardType", "?", (t.start, t.end))
            } else {
                AstNode::interior("WildcardType", self.span_from(start), children)
            });
        }
        if !self.is_ident() {
            return self.error("expected type");
        }
        let mut segments: Vec<(Tok<'a>, Vec<AstNode>)> = Vec::new();
        loop {
            let name = self.expect_ident()?;
            let args = if self.at("<") { self.type_arguments()? } else { Vec::new() };
            segments.push((name, args));
            if self.at(".") && self.peek_at(1).kind == TokKind::Ident && !is_reserved(self.peek_at(1).text) {
                self.bump();
            } else {
                break;
            }
        }
        if segments.iter().all(|(_, a)| a.is_empty()) {
            let text = segments.iter().map(|(n, _)| n.text).collect::<Vec<_>>().join(".");
            return Ok(AstNode::leaf("ClassOrInterfaceType", text, self.span_from(start)));
        }
        let mut children = Vec::new();
        for (name, args) in segments {
            children.push(AstNode::leaf("ClassOrInterfaceType", name.text, (name.start, name.end)));
            children.extend(args);
        }
        Ok(AstNode::interior("ClassOrInterfaceType", self.span_from(start), children))
    }

    fn type_arguments(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("<")?;
        let mut args = Vec::new();
        if self.eat(">") {
            return Ok(args);
        }
        loop {
            args.push(self.parse_type()?);
            if self.eat(">") {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    // ----------------------------------------------------------- statements

    fn block(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let open = self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.eat("}") {
            if self.at_eof() {
                return Err(ParseError::new(open.start, "unterminated block"));
            }
            stmts.push(self.block_statement()?);
        }
        Ok(AstNode::interior("BlockStmt", self.span_from(start), stmts))
    }

    fn block_statement(&mut self) -> PResult<AstNode> {
        let save = self.pos;
        let no_lambda = self.no_lambda;
        match self.statement() {
            Ok(s) => Ok(s),
            Err(e) => {
                self.pos = save;
                self.no_lambda = no_lambda;
                self.unknown_statement(e)
            }
        }
    }

    fn unknown_statement(&mut self, err: ParseError) -> PResult<AstNode> {
        let start = self.pos;
        let mut depth = 0usize;
        let mut leaves = Vec::new();
        loop {
            let t = self.peek();
            match (t.kind, t.text) {
                (TokKind::Eof, _) => return Err(err),
                (TokKind::Punct, "(" | "[" | "{") => depth += 1,
                (TokKind::Punct, ")" | "]" | "}") => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                    if depth == 0 && t.text == "}" {
                        self.bump();
                        break;
                    }
                }
                (TokKind::Punct, ";") if depth == 0 => {
                    self.bump();
                    break;
                }
                (TokKind::Punct, _) => {}
                (TokKind::Ident, text) if is_reserved(text) => {}
                (kind, text) => leaves.push(AstNode::leaf(literal_kind(kind, text), text, (t.start, t.end))),
            }
            self.bump();
        }
        if self.pos == start {
            return Err(err);
        }
        log::debug!("unsupported statement at byte {} degraded: {}", self.toks[start].start, err);
        Ok(AstNode::interior("UnknownStmt", self.span_from(start), leaves))
    }

    fn statement(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let t = self.peek();
        if t.kind == TokKind::Punct {
            match t.text {
                "{" => return self.block(),
                ";" => {
                    self.bump();
                    return Ok(AstNode::interior("EmptyStmt", self.span_from(start), vec![]));
                }
                _ => {}
            }
        }
        if t.kind == TokKind::Ident {
            match t.text {
                "if" => {
                    self.bump();
                    let cond = self.paren_expr()?;
                    let then = self.statement()?;
                    let mut children = vec![cond, then];
                    if self.eat("else") {
                        children.push(self.statement()?);
                    }
                    return Ok(AstNode::interior("IfStmt", self.span_from(start), children));
                }
                "while" => {
                    self.bump();
                    let cond = self.paren_expr()?;
                    let body = self.statement()?;
                    return Ok(AstNode::interior("WhileStmt", self.span_from(start), vec![cond, body]));
                }
                "do" => {
                    self.bump();
                    let body = self.statement()?;
                    self.expect("while")?;
                    let cond = self.paren_expr()?;
                    self.expect(";")?;
                    return Ok(AstNode::interior("DoStmt", self.span_from(start), vec![body, cond]));
                }
                "for" => return self.for_statement(),
                "return" | "throw" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.at(";") {
                        children.push(self.expr()?);
                    }
                    self.expect(";")?;
                    let kind = if t.text == "return" { "ReturnStmt" } else { "ThrowStmt" };
                    return Ok(AstNode::interior(kind, self.span_from(start), children));
                }
                "break" | "continue" => {
                    self.bump();
                    let mut children = Vec::new();
                    if self.is_ident() {
                        let l = self.bump();
                        children.push(AstNode::leaf("SimpleName", l.text, (l.start, l.end)));
                    }
                    self.expect(";")?;
                    let kind = if t.text == "break" { "BreakStmt" } else { "ContinueStmt" };
                    return Ok(AstNode::interior(kind, self.span_from(start), children));
                }
                "try" => return self.try_statement(),
                "switch" => {
                    let node = self.switch_construct("SwitchStmt")?;
                    self.eat(";");
                    return Ok(node);
                }
                "synchronized" => {
                    self.bump();
                    let lock = self.paren_expr()?;
                    let body = self.block()?;
                    return Ok(AstNode::interior("SynchronizedStmt", self.span_from(start), vec![lock, body]));
                }
                "assert" => {
                    self.bump();
                    let mut children = vec![self.expr()?];
                    if self.eat(":") {
                        children.push(self.expr()?);
                    }
                    self.expect(";")?;
                    return Ok(AstNode::interior("AssertStmt", self.span_from(start), children));
                }
                "yield" if !matches!(self.peek_at(1).text, "=" | "." | "[" | "++" | "--" | "(") => {
                    self.bump();
                    let e = self.expr()?;
                    self.expect(";")?;
                    return Ok(AstNode::interior("YieldStmt", self.span_from(start), vec![e]));
                }
                "else" | "case" | "catch" | "finally" => return self.error("unexpected keyword"),
                _ => {}
            }
            if self.is_ident() && self.peek_at(1).text == ":" && self.peek_at(1).kind == TokKind::Punct {
                let label = self.bump();
                self.bump();
                let body = self.statement()?;
                return Ok(AstNode::interior(
                    "LabeledStmt",
                    self.span_from(start),
                    vec![AstNode::leaf("SimpleName", label.text, (label.start, label.end)), body],
                ));
            }
        }
        // local class / record / enum declarations
        {
            let save = self.pos;
            self.modifiers()?;
            if self.at_type_decl() {
                self.body_depth += 1;
                let decl = self.type_decl();
                self.body_depth -= 1;
                return Ok(AstNode::interior("LocalClassDeclarationStmt", self.span_from(start), vec![decl?]));
            }
            let had_modifiers = self.pos != save;
            if let Some(decl) = self.try_local_var_decl(had_modifiers)? {
                self.expect(";")?;
                return Ok(AstNode::interior("ExpressionStmt", self.span_from(start), vec![decl]));
            }
            self.pos = save;
        }
        let e = self.expr()?;
        self.expect(";")?;
        Ok(AstNode::interior("ExpressionStmt", self.span_from(start), vec![e]))
    }

    /// Parses `Type name [= init], ...` if the upcoming tokens form one;
    /// otherwise restores the position and returns `None`.
    fn try_local_var_decl(&mut self, committed: bool) -> PResult<Option<AstNode>> {
        let start = self.pos;
        if !self.at_type_start() {
            if committed {
                return self.error("expected type");
            }
            return Ok(None);
        }
        let ty = match self.parse_type() {
            Ok(ty) => ty,
            Err(e) if committed => return Err(e),
            Err(_) => {
                self.pos = start;
                return Ok(None);
            }
        };
        let looks_like_decl = self.is_ident() && matches!(self.peek_at(1).text, "=" | ";" | "," | "[" | ":" | ")");
        if !looks_like_decl {
            if committed {
                return self.error("expected variable name");
            }
            self.pos = start;
            return Ok(None);
        }
        let name = self.bump();
        let mut children = vec![ty];
        children.extend(self.declarators(name)?);
        Ok(Some(AstNode::interior("VariableDeclarationExpr", self.span_from(start), children)))
    }

    /// Declarators after the first name has been consumed.
    fn declarators(&mut self, first: Tok<'a>) -> PResult<Vec<AstNode>> {
        let mut out = Vec::new();
        let mut name = first;
        loop {
            let start_idx = self.pos - 1;
            while self.at("[") && self.peek_at(1).text == "]" {
                self.pos += 2;
            }
            let mut children = vec![AstNode::leaf("SimpleName", name.text, (name.start, name.end))];
            if self.eat("=") {
                children.push(self.expression_or_initializer()?);
            }
            out.push(AstNode::interior("VariableDeclarator", self.span_from(start_idx), children));
            if !self.eat(",") {
                return Ok(out);
            }
            name = self.expect_ident()?;
        }
    }

    fn expression_or_initializer(&mut self) -> PResult<AstNode> {
        if self.at("{") {
            self.array_initializer()
        } else if self.at("@") {
            let start = self.pos;
            self.skip_annotation()?;
            Ok(AstNode::interior("AnnotationExpr", self.span_from(start), vec![]))
        } else {
            self.expr()
        }
    }

    fn array_initializer(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.expect("{")?;
        let mut values = Vec::new();
        while !self.eat("}") {
            values.push(self.expression_or_initializer()?);
            if !self.eat(",") {
                self.expect("}")?;
                break;
            }
        }
        Ok(AstNode::interior("ArrayInitializerExpr", self.span_from(start), values))
    }

    fn paren_expr(&mut self) -> PResult<AstNode> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn for_statement(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.expect("for")?;
        self.expect("(")?;
        let init_start = self.pos;
        self.modifiers()?;
        let committed = self.pos != init_start;
        if let Some(decl) = self.try_local_var_decl(committed)? {
            if self.eat(":") {
                let iterable = self.expr()?;
                self.expect(")")?;
                let body = self.statement()?;
                return Ok(AstNode::interior("ForEachStmt", self.span_from(start), vec![decl, iterable, body]));
            }
            return self.classic_for(start, vec![decl]);
        }
        let mut init = Vec::new();
        if !self.at(";") {
            loop {
                init.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.classic_for(start, init)
    }

    fn classic_for(&mut self, start: usize, mut children: Vec<AstNode>) -> PResult<AstNode> {
        self.expect(";")?;
        if !self.at(";") {
            children.push(self.expr()?);
        }
        self.expect(";")?;
        if !self.at(")") {
            loop {
                children.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        children.push(self.statement()?);
        Ok(AstNode::interior("ForStmt", self.span_from(start), children))
    }

    fn try_statement(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        self.expect("try")?;
        let mut children = Vec::new();
        if self.eat("(") {
            while !self.eat(")") {
                let s = self.pos;
                self.modifiers()?;
                let committed = self.pos != s;
                match self.try_local_var_decl(committed)? {
                    Some(d) => children.push(d),
                    None => children.push(self.expr()?),
                }
                if !self.eat(";") {
                    self.expect(")")?;
                    break;
                }
            }
        }
        children.push(self.block()?);
        while self.at("catch") {
            let c_start = self.pos;
            self.bump();
            self.expect("(")?;
            let p_start = self.pos;
            self.modifiers()?;
            let mut types = vec![self.parse_type()?];
            while self.eat("|") {
                types.push(self.parse_type()?);
            }
            let ty = if types.len() == 1 {
                types.pop().unwrap()
            } else {
                let span = (types[0].span.0, types.last().unwrap().span.1);
                AstNode::interior("UnionType", span, types)
            };
            let name = self.expect_ident()?;
            let param = AstNode::interior(
                "Parameter",
                self.span_from(p_start),
                vec![ty, AstNode::leaf("SimpleName", name.text, (name.start, name.end))],
            );
            self.expect(")")?;
            let body = self.block()?;
            children.push(AstNode::interior("CatchClause", self.span_from(c_start), vec![param, body]));
        }
        if self.eat("finally") {
            children.push(self.block()?);
        }
        Ok(AstNode::interior("TryStmt", self.span_from(start), children))
    }

    fn switch_construct(&mut self, kind: &str) -> PResult<AstNode> {
        let start = self.pos;
        self.expect("switch")?;
        let selector = self.paren_expr()?;
        let mut children = vec![selector];
        let open = self.expect("{")?;
        while !self.eat("}") {
            if self.at_eof() {
                return Err(ParseError::new(open.start, "unterminated switch"));
            }
            children.push(self.switch_entry()?);
        }
        Ok(AstNode::interior(kind, self.span_from(start), children))
    }

    fn switch_entry(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let mut children = Vec::new();
        if self.eat("default") {
        } else {
            self.expect("case")?;
            let saved = self.no_lambda;
            self.no_lambda = true;
            let labels = self.case_labels();
            self.no_lambda = saved;
            children.extend(labels?);
        }
        if self.eat("->") {
            if self.at("{") {
                children.push(self.block()?);
            } else if self.at("throw") {
                children.push(self.statement()?);
            } else {
                let e = self.expr()?;
                self.expect(";")?;
                children.push(e);
            }
        } else {
            self.expect(":")?;
            while !self.at("case") && !self.at("default") && !self.at("}") {
                if self.at_eof() {
                    return self.error("unterminated switch");
                }
                children.push(self.block_statement()?);
            }
        }
        Ok(AstNode::interior("SwitchEntry", self.span_from(start), children))
    }

    fn case_labels(&mut self) -> PResult<Vec<AstNode>> {
        let mut labels = Vec::new();
        loop {
            if self.eat("default") {
            } else {
                // type pattern `case Foo f`
                let save = self.pos;
                let mut pattern = None;
                if self.at_type_start() {
                    if let Ok(ty) = self.parse_type() {
                        if self.is_ident() {
                            let n = self.bump();
                            let span = (ty.span.0, n.end);
                            pattern = Some(AstNode::interior(
                                "TypePatternExpr",
                                span,
                                vec![ty, AstNode::leaf("SimpleName", n.text, (n.start, n.end))],
                            ));
                        }
                    }
                }
                match pattern {
                    Some(p) => labels.push(p),
                    None => {
                        self.pos = save;
                        labels.push(self.ternary()?);
                    }
                }
            }
            if !self.eat(",") {
                return Ok(labels);
            }
        }
    }

    // ---------------------------------------------------------- expressions

    pub(crate) fn expr(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let lhs = self.ternary()?;
        if let Some((op, n)) = self.peek_assign_op() {
            self.pos += n;
            let rhs = if self.at("{") { self.array_initializer()? } else { self.expr()? };
            return Ok(AstNode::interior(format!("AssignExpr:{op}"), self.span_from(start), vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn peek_assign_op(&self) -> Option<(&'static str, usize)> {
        let t = self.peek();
        if t.kind != TokKind::Punct {
            return None;
        }
        let op = match t.text {
            "=" => "assign",
            "+=" => "plus",
            "-=" => "minus",
            "*=" => "multiply",
            "/=" => "divide",
            "%=" => "remainder",
            "&=" => "binAnd",
            "|=" => "binOr",
            "^=" => "xor",
            "<<=" => "leftShift",
            ">" => {
                let run = self.gt_run();
                if run >= 2 && self.peek_at(run).text == "=" && self.adjacent(run) {
                    return Some((if run == 2 { "signedRightShift" } else { "unsignedRightShift" }, run + 1));
                }
                return None;
            }
            _ => return None,
        };
        Some((op, 1))
    }

    /// Number of adjacent `>` tokens starting at the cursor, at most 3.
    fn gt_run(&self) -> usize {
        let mut n = 1;
        while n < 3 && self.peek_at(n).text == ">" && self.adjacent(n) {
            n += 1;
        }
        n
    }

    fn ternary(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let cond = self.binary(1)?;
        if self.eat("?") {
            let then = self.ternary_branch()?;
            self.expect(":")?;
            let other = self.ternary_branch()?;
            return Ok(AstNode::interior("ConditionalExpr", self.span_from(start), vec![cond, then, other]));
        }
        Ok(cond)
    }

    fn ternary_branch(&mut self) -> PResult<AstNode> {
        if self.lambda_ahead() {
            self.lambda()
        } else {
            self.ternary()
        }
    }

    fn peek_binop(&self) -> Option<(&'static str, usize, u8)> {
        let t = self.peek();
        if t.kind == TokKind::Ident {
            return (t.text == "instanceof").then_some(("instanceof", 1, 7));
        }
        if t.kind != TokKind::Punct {
            return None;
        }
        Some(match t.text {
            "||" => ("or", 1, 1),
            "&&" => ("and", 1, 2),
            "|" => ("binOr", 1, 3),
            "^" => ("xor", 1, 4),
            "&" => ("binAnd", 1, 5),
            "==" => ("equals", 1, 6),
            "!=" => ("notEquals", 1, 6),
            "<" => ("less", 1, 7),
            "<=" => ("lessEquals", 1, 7),
            "<<" => ("leftShift", 1, 8),
            "+" => ("plus", 1, 9),
            "-" => ("minus", 1, 9),
            "*" => ("multiply", 1, 10),
            "/" => ("divide", 1, 10),
            "%" => ("remainder", 1, 10),
            ">" => {
                let run = self.gt_run();
                let next_eq = self.peek_at(run).text == "=" && self.adjacent(run);
                match (run, next_eq) {
                    (1, true) => ("greaterEquals", 2, 7),
                    (1, false) => ("greater", 1, 7),
                    (_, true) => return None,
                    (2, false) => ("signedRightShift", 2, 8),
                    _ => ("unsignedRightShift", 3, 8),
                }
            }
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<AstNode> {
        let start = self.pos;
        let mut left = self.unary()?;
        while let Some((op, n, prec)) = self.peek_binop() {
            if prec < min_prec {
                break;
            }
            self.pos += n;
            if op == "instanceof" {
                self.eat("final");
                let ty = self.parse_type()?;
                let mut children = vec![left, ty];
                if self.is_ident() {
                    let n = self.bump();
                    children.push(AstNode::leaf("SimpleName", n.text, (n.start, n.end)));
                }
                left = AstNode::interior("InstanceOfExpr", self.span_from(start), children);
                continue;
            }
            let right = self.binary(prec + 1)?;
            left = AstNode::interior(format!("BinaryExpr:{op}"), self.span_from(start), vec![left, right]);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let t = self.peek();
        if t.kind == TokKind::Punct {
            let op = match t.text {
                "+" => Some("plus"),
                "-" => Some("minus"),
                "!" => Some("logicalComplement"),
                "~" => Some("bitwiseComplement"),
                "++" => Some("preIncrement"),
                "--" => Some("preDecrement"),
                _ => None,
            };
            if let Some(op) = op {
                self.bump();
                let operand = self.unary()?;
                return Ok(AstNode::interior(format!("UnaryExpr:{op}"), self.span_from(start), vec![operand]));
            }
            if t.text == "(" && !self.lambda_ahead() {
                if let Some(cast) = self.try_cast()? {
                    return Ok(cast);
                }
            }
        }
        let prim = self.primary()?;
        self.postfix(start, prim)
    }

    fn try_cast(&mut self) -> PResult<Option<AstNode>> {
        let start = self.pos;
        self.bump();
        let primitive = self.peek().kind == TokKind::Ident && PRIMITIVES.contains(&self.peek().text);
        if !self.at_type_start() {
            self.pos = start;
            return Ok(None);
        }
        let ty = match self.parse_type() {
            Ok(t) => t,
            Err(_) => {
                self.pos = start;
                return Ok(None);
            }
        };
        // intersection casts: (A & B)
        let mut ty = ty;
        while self.at("&") && !primitive {
            let save = self.pos;
            self.bump();
            match self.parse_type() {
                Ok(other) => {
                    let span = (ty.span.0, other.span.1);
                    ty = AstNode::interior("IntersectionType", span, vec![ty, other]);
                }
                Err(_) => {
                    self.pos = save;
                    break;
                }
            }
        }
        if !self.at(")") {
            self.pos = start;
            return Ok(None);
        }
        self.bump();
        let next = self.peek();
        let operand_follows = match next.kind {
            TokKind::Int | TokKind::Float | TokKind::Str | TokKind::Char | TokKind::TextBlock => true,
            TokKind::Ident => {
                !is_reserved(next.text)
                    || matches!(next.text, "this" | "super" | "new" | "true" | "false" | "null" | "switch")
                    || PRIMITIVES.contains(&next.text)
            }
            TokKind::Punct => {
                matches!(next.text, "(" | "!" | "~") || (primitive && matches!(next.text, "+" | "-" | "++" | "--"))
            }
            TokKind::Eof => false,
        };
        if !operand_follows {
            self.pos = start;
            return Ok(None);
        }
        let operand = if self.lambda_ahead() { self.lambda()? } else { self.unary()? };
        Ok(Some(AstNode::interior("CastExpr", self.span_from(start), vec![ty, operand])))
    }

    fn lambda_ahead(&self) -> bool {
        if self.no_lambda {
            return false;
        }
        if self.is_ident() && self.peek_at(1).text == "->" {
            return true;
        }
        if !self.at("(") {
            return false;
        }
        let mut depth = 0;
        let mut i = self.pos;
        while i < self.toks.len() {
            let t = self.toks[i];
            if t.kind == TokKind::Punct {
                match t.text {
                    "(" => depth += 1,
                    ")" => {
                        depth -= 1;
                        if depth == 0 {
                            return self.toks.get(i + 1).is_some_and(|n| n.text == "->");
                        }
                    }
                    ";" | "{" | "}" => return false,
                    _ => {}
                }
            }
            if t.kind == TokKind::Eof {
                return false;
            }
            i += 1;
        }
        false
    }

    fn lambda(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let mut children = Vec::new();
        if self.is_ident() {
            let n = self.bump();
            children.push(AstNode::interior(
                "Parameter",
                (n.start, n.end),
                vec![AstNode::leaf("SimpleName", n.text, (n.start, n.end))],
            ));
        } else {
            self.expect("(")?;
            while !self.eat(")") {
                let p_start = self.pos;
                self.modifiers()?;
                let inferred = self.is_ident() && matches!(self.peek_at(1).text, "," | ")");
                let mut parts = Vec::new();
                if !inferred {
                    parts.push(self.parse_type()?);
                    self.eat("...");
                }
                let n = self.expect_ident()?;
                parts.push(AstNode::leaf("SimpleName", n.text, (n.start, n.end)));
                children.push(AstNode::interior("Parameter", self.span_from(p_start), parts));
                if !self.eat(",") {
                    self.expect(")")?;
                    break;
                }
            }
        }
        self.expect("->")?;
        let saved = self.no_lambda;
        self.no_lambda = false;
        let body = if self.at("{") { self.block() } else { self.expr() };
        self.no_lambda = saved;
        children.push(body?);
        Ok(AstNode::interior("LambdaExpr", self.span_from(start), children))
    }

    fn arguments(&mut self) -> PResult<Vec<AstNode>> {
        self.expect("(")?;
        let saved = self.no_lambda;
        self.no_lambda = false;
        let mut args = Vec::new();
        let result = (|| {
            if self.eat(")") {
                return Ok(());
            }
            loop {
                args.push(if self.lambda_ahead() { self.lambda()? } else { self.expr()? });
                if self.eat(")") {
                    return Ok(());
                }
                self.expect(",")?;
            }
        })();
        self.no_lambda = saved;
        result.map(|_| args)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let start = self.pos;
        let t = self.peek();
        match t.kind {
            TokKind::Int | TokKind::Float | TokKind::Str | TokKind::Char | TokKind::TextBlock => {
                self.bump();
                return Ok(AstNode::leaf(literal_kind(t.kind, t.text), t.text, (t.start, t.end)));
            }
            TokKind::Eof => return self.error("expected expression"),
            _ => {}
        }
        if self.lambda_ahead() {
            return self.lambda();
        }
        if t.kind == TokKind::Punct {
            if t.text == "(" {
                self.bump();
                let saved = self.no_lambda;
                self.no_lambda = false;
                let inner = self.expr();
                self.no_lambda = saved;
                let inner = inner?;
                self.expect(")")?;
                return Ok(AstNode::interior("EnclosedExpr", self.span_from(start), vec![inner]));
            }
            return self.error("expected expression");
        }
        match t.text {
            "true" | "false" => {
                self.bump();
                Ok(AstNode::leaf("BooleanLiteralExpr", t.text, (t.start, t.end)))
            }
            "null" => {
                self.bump();
                Ok(AstNode::leaf("NullLiteralExpr", t.text, (t.start, t.end)))
            }
            "this" | "super" => {
                self.bump();
                let kind = if t.text == "this" { "ThisExpr" } else { "SuperExpr" };
                let node = AstNode::leaf(kind, t.text, (t.start, t.end));
                if self.at("(") {
                    let mut children = vec![node];
                    children.extend(self.arguments()?);
                    return Ok(AstNode::interior("MethodCallExpr", self.span_from(start), children));
                }
                Ok(node)
            }
            "new" => self.creation(None),
            "switch" => self.switch_construct("SwitchExpr"),
            _ if PRIMITIVES.contains(&t.text) || t.text == "void" => {
                let ty = self.parse_type()?;
                if self.at(".") && self.peek_at(1).text == "class" {
                    self.pos += 2;
                    return Ok(AstNode::interior("ClassExpr", self.span_from(start), vec![ty]));
                }
                if self.at("::") {
                    return Ok(ty);
                }
                self.error("expected expression")
            }
            _ if self.is_ident() => {
                self.bump();
                if self.at("(") {
                    let mut children = vec![AstNode::leaf("SimpleName", t.text, (t.start, t.end))];
                    children.extend(self.arguments()?);
                    return Ok(AstNode::interior("MethodCallExpr", self.span_from(start), children));
                }
                Ok(AstNode::leaf("NameExpr", t.text, (t.start, t.end)))
            }
            _ => self.error("expected expression"),
        }
    }

    fn creation(&mut self, scope: Option<AstNode>) -> PResult<AstNode> {
        let start_span = scope.as_ref().map(|s| s.span.0);
        let start = self.pos;
        self.expect("new")?;
        if self.at("<") {
            self.skip_balanced("<", ">")?;
        }
        let ty = self.parse_base_type()?;
        let mut children: Vec<AstNode> = scope.into_iter().collect();
        children.push(ty);
        let kind = if self.at("[") {
            while self.at("[") {
                if self.peek_at(1).text == "]" {
                    self.pos += 2;
                } else {
                    self.bump();
                    children.push(self.expr()?);
                    self.expect("]")?;
                }
            }
            if self.at("{") {
                children.push(self.array_initializer()?);
            }
            "ArrayCreationExpr"
        } else {
            children.extend(self.arguments()?);
            if self.at("{") {
                self.body_depth += 1;
                let body = self.class_body(false, false);
                self.body_depth -= 1;
                children.extend(body?);
            }
            "ObjectCreationExpr"
        };
        let mut span = self.span_from(start);
        if let Some(s) = start_span {
            span.0 = s;
        }
        Ok(AstNode::interior(kind, span, children))
    }

    fn postfix(&mut self, start: usize, mut e: AstNode) -> PResult<AstNode> {
        let span_start = e.span.0;
        let _ = start;
        loop {
            if self.at(".") {
                self.bump();
                if self.at("new") {
                    e = self.creation(Some(e))?;
                    continue;
                }
                if self.at("<") {
                    self.skip_balanced("<", ">")?;
                }
                let t = self.peek();
                if t.kind != TokKind::Ident {
                    return self.error("expected member name");
                }
                self.bump();
                let end = |p: &Self| p.toks[p.pos - 1].end;
                match t.text {
                    "class" => {
                        let ty = AstNode::leaf("ClassOrInterfaceType", e.to_type_text(), e.span);
                        e = AstNode::interior("ClassExpr", (span_start, end(self)), vec![ty]);
                    }
                    "this" | "super" => {
                        let kind = if t.text == "this" { "ThisExpr" } else { "SuperExpr" };
                        let leaf = AstNode::leaf(kind, t.text, (t.start, t.end));
                        e = AstNode::interior("FieldAccessExpr", (span_start, end(self)), vec![e, leaf]);
                    }
                    _ => {
                        let name = AstNode::leaf("SimpleName", t.text, (t.start, t.end));
                        if self.at("(") {
                            let mut children = vec![e, name];
                            children.extend(self.arguments()?);
                            e = AstNode::interior("MethodCallExpr", (span_start, end(self)), children);
                        } else {
                            e = AstNode::interior("FieldAccessExpr", (span_start, end(self)), vec![e, name]);
                        }
                    }
                }
            } else if self.at("[") {
                if self.peek_at(1).text == "]" {
                    // `String[]::new`, `int[].class`
                    while self.at("[") && self.peek_at(1).text == "]" {
                        self.pos += 2;
                    }
                    let end = self.toks[self.pos - 1].end;
                    e = AstNode::interior("ArrayType", (span_start, end), vec![e]);
                    continue;
                }
                self.bump();
                let index = self.expr()?;
                self.expect("]")?;
                let end = self.toks[self.pos - 1].end;
                e = AstNode::interior("ArrayAccessExpr", (span_start, end), vec![e, index]);
            } else if self.at("++") || self.at("--") {
                let op = if self.at("++") { "postIncrement" } else { "postDecrement" };
                self.bump();
                let end = self.toks[self.pos - 1].end;
                e = AstNode::interior(format!("UnaryExpr:{op}"), (span_start, end), vec![e]);
            } else if self.at("::") {
                self.bump();
                if self.at("<") {
                    self.skip_balanced("<", ">")?;
                }
                let t = self.peek();
                if t.kind != TokKind::Ident {
                    return self.error("expected method reference name");
                }
                self.bump();
                let leaf = AstNode::leaf("SimpleName", t.text, (t.start, t.end));
                e = AstNode::interior("MethodReferenceExpr", (span_start, t.end), vec![e, leaf]);
            } else {
                return Ok(e);
            }
        }
    }
}

fn literal_kind(kind: TokKind, text: &str) -> &'static str {
    match kind {
        TokKind::Int if text.ends_with(['l', 'L']) => "LongLiteralExpr",
        TokKind::Int => "IntegerLiteralExpr",
        TokKind::Float => "DoubleLiteralExpr",
        TokKind::Str => "StringLiteralExpr",
        TokKind::Char => "CharLiteralExpr",
        TokKind::TextBlock => "TextBlockLiteralExpr",
        _ => match text {
            "true" | "false" => "BooleanLiteralExpr",
            "null" => "NullLiteralExpr",
            "this" => "ThisExpr",
            _ => "NameExpr",
        },
    }
}

impl AstNode {
    fn to_type_text(&self) -> String {
        match &self.token {
            Some(t) => t.clone(),
            None => self.leaves().iter().filter_map(|l| l.token.as_deref()).collect::<Vec<_>>().join("."),
        }
    }
}
