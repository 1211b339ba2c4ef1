//! Random Java methods for extraction tests.

use rand::prelude::*;

const NAMES: [&str; 10] = ["count", "userName", "MAX_SIZE", "i", "buf", "httpClient", "x", "value", "list", "getData"];

fn name(rng: &mut impl Rng) -> &'static str {
    NAMES[rng.random_range(0..NAMES.len())]
}

fn expr(rng: &mut impl Rng, depth: usize) -> String {
    let pick = if depth == 0 { rng.random_range(0..3) } else { rng.random_range(0..9) };
    match pick {
        0 => name(rng).to_string(),
        1 => rng.random_range(0..100).to_string(),
        2 => "\"text\"".to_string(),
        3 => format!("{} + {}", expr(rng, depth - 1), expr(rng, depth - 1)),
        4 => format!("{}({})", name(rng), expr(rng, depth - 1)),
        5 => format!("{}.{}({}, {})", name(rng), name(rng), expr(rng, depth - 1), expr(rng, depth - 1)),
        6 => format!("{} > {} ? {} : {}", name(rng), expr(rng, depth - 1), expr(rng, 0), expr(rng, 0)),
        7 => format!("new Foo({})", expr(rng, depth - 1)),
        _ => format!("{}[{}]", name(rng), expr(rng, depth - 1)),
    }
}

fn stmt(rng: &mut impl Rng, depth: usize) -> String {
    let pick = if depth == 0 { rng.random_range(0..3) } else { rng.random_range(0..7) };
    match pick {
        0 => format!("{} = {};", name(rng), expr(rng, 2)),
        1 => format!("int {} = {};", name(rng), expr(rng, 1)),
        2 => format!("{}.{}();", name(rng), name(rng)),
        3 => format!("if ({} != null) {{ {} }}", name(rng), stmt(rng, depth - 1)),
        4 => format!("for (int i = 0; i < {}; i++) {{ {} }}", name(rng), stmt(rng, depth - 1)),
        5 => format!("while ({}) {{ {} }} ", name(rng), stmt(rng, depth - 1)),
        _ => format!("return {};", expr(rng, 2)),
    }
}

/// Source of one class holding one random method.
pub fn random_method(rng: &mut impl Rng, statements: usize) -> String {
    let body: Vec<String> = (0..statements).map(|_| stmt(rng, 2)).collect();
    format!("class Gen {{ int {}(int {}, String s) {{ {} }} }}", name(rng), name(rng), body.join(" "))
}

pub fn random_statement(rng: &mut impl Rng) -> String {
    stmt(rng, 1)
}
