//! Line diff based on a longest common subsequence, computed with
//! Hirschberg's linear-space recursion after trimming the common prefix and
//! suffix.

use std::collections::HashMap;

/// `(added, removed)` lines, each in source order.
pub fn diff_lines(pre_text: &str, post_text: &str) -> (Vec<String>, Vec<String>) {
    let pre: Vec<&str> = pre_text.lines().collect();
    let post: Vec<&str> = post_text.lines().collect();
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut intern = |l| {
        let n = ids.len() as u32;
        *ids.entry(l).or_insert(n)
    };
    let a: Vec<u32> = pre.iter().map(|&l| intern(l)).collect();
    let b: Vec<u32> = post.iter().map(|&l| intern(l)).collect();
    let (keep_a, keep_b) = lcs_mask(&a, &b);
    let added = post.iter().zip(&keep_b).filter(|(_, &k)| !k).map(|(l, _)| l.to_string()).collect();
    let removed = pre.iter().zip(&keep_a).filter(|(_, &k)| !k).map(|(l, _)| l.to_string()).collect();
    (added, removed)
}

/// Marks which elements of `a` and `b` belong to one longest common
/// subsequence.
pub(crate) fn lcs_mask(a: &[u32], b: &[u32]) -> (Vec<bool>, Vec<bool>) {
    let mut ka = vec![false; a.len()];
    let mut kb = vec![false; b.len()];
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..].iter().rev().zip(b[prefix..].iter().rev()).take_while(|(x, y)| x == y).count();
    for i in 0..prefix {
        ka[i] = true;
        kb[i] = true;
    }
    for i in 0..suffix {
        ka[a.len() - 1 - i] = true;
        kb[b.len() - 1 - i] = true;
    }
    let mut pairs = Vec::new();
    hirschberg(&a[prefix..a.len() - suffix], &b[prefix..b.len() - suffix], prefix, prefix, &mut pairs);
    for (i, j) in pairs {
        ka[i] = true;
        kb[j] = true;
    }
    (ka, kb)
}

fn lcs_row(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut prev = vec![0u32; b.len() + 1];
    let mut cur = vec![0u32; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}

fn hirschberg(a: &[u32], b: &[u32], ao: usize, bo: usize, out: &mut Vec<(usize, usize)>) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    if a.len() == 1 {
        if let Some(j) = b.iter().position(|&y| y == a[0]) {
            out.push((ao, bo + j));
        }
        return;
    }
    let mid = a.len() / 2;
    let fwd = lcs_row(&a[..mid], b);
    let ra: Vec<u32> = a[mid..].iter().rev().copied().collect();
    let rb: Vec<u32> = b.iter().rev().copied().collect();
    let bwd = lcs_row(&ra, &rb);
    let split = (0..=b.len()).max_by_key(|&j| (fwd[j] + bwd[b.len() - j], std::cmp::Reverse(j))).unwrap();
    hirschberg(&a[..mid], &b[..split], ao, bo, out);
    hirschberg(&a[mid..], &b[split..], ao + mid, bo + split, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(diff_lines("a\nb", "a\nb"), (vec![], vec![]));
        assert_eq!(diff_lines("a\nb", "a\nc"), (vec!["c".to_string()], vec!["b".to_string()]));
        assert_eq!(diff_lines("", "x\ny"), (vec!["x".to_string(), "y".to_string()], vec![]));
    }

    #[test]
    fn lcs_length_matches_dp() {
        let a = [1, 2, 3, 4, 1, 2, 5, 6, 2];
        let b = [2, 4, 1, 3, 2, 6, 5, 2, 9];
        let (ka, kb) = lcs_mask(&a, &b);
        assert_eq!(lcs_row(&a, &b)[b.len()] as usize, ka.iter().filter(|&&k| k).count());
        let sa: Vec<_> = a.iter().zip(&ka).filter(|p| *p.1).map(|p| p.0).collect();
        let sb: Vec<_> = b.iter().zip(&kb).filter(|p| *p.1).map(|p| p.0).collect();
        assert_eq!(sa, sb);
    }
}
