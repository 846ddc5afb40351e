//! Independent reference constructions on symbol strings. Nothing here
//! calls into the oracle implementation.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

/// Feature vectors that symbolize exactly as `symbols` under any threshold
/// below 5.
pub fn symbol_frames(symbols: &[usize]) -> Vec<Vec<f64>> {
    symbols.iter().map(|&c| vec![c as f64 * 10.0]).collect()
}

/// End position (1-based) of the first occurrence of `w` in `s`.
pub fn first_end(s: &[usize], w: &[usize]) -> Option<usize> {
    if w.is_empty() {
        return Some(0);
    }
    (w.len()..=s.len()).find(|&end| &s[end - w.len()..end] == w)
}

/// Length of the longest suffix of `s[..t]` that also occurs ending
/// strictly before `t`.
pub fn longest_repeated_suffix(s: &[usize], t: usize) -> usize {
    let prefix = &s[..t];
    (1..t)
        .rev()
        .find(|&len| {
            let suffix = &prefix[t - len..];
            first_end(prefix, suffix).is_some_and(|e| e < t)
        })
        .unwrap_or(0)
}

/// State reached by reading `word` from the root of `links` (labels are
/// the symbols of the targets), if the word is spellable.
pub fn recognize(s: &[usize], links: &BTreeSet<(usize, usize)>, word: &[usize]) -> Option<usize> {
    let mut state = 0;
    for &c in word {
        state = links
            .range((state, 0)..(state + 1, 0))
            .map(|&(_, t)| t)
            .find(|&t| s[t - 1] == c)?;
    }
    Some(state)
}

/// Suffix links by definition: the state of the reference factor oracle in
/// which the longest repeated suffix of `s[..t]` is recognized (0 when there
/// is none). Index 0 is the root (`None`).
pub fn brute_suffix_links(s: &[usize]) -> Vec<Option<usize>> {
    let links = brute_factor_oracle(s);
    let mut out = vec![None];
    for t in 1..=s.len() {
        let len = longest_repeated_suffix(s, t);
        out.push(Some(
            recognize(s, &links, &s[t - len..t]).expect("repeated suffix is a factor"),
        ));
    }
    out
}

/// Factor-oracle transitions by the offline definition. States are
/// processed left to right; for state `i` take `u`, the shortest word that
/// reads from the root to `i` over the transitions built so far. Besides the
/// spine `i -> i + 1`, for every other symbol `c` such that `u c` occurs at
/// or after the start of `u`'s occurrence ending at `i`, add a transition to
/// the end of that first occurrence. Returns `(source, target)` pairs.
pub fn brute_factor_oracle(s: &[usize]) -> BTreeSet<(usize, usize)> {
    let n = s.len();
    let alphabet: BTreeSet<usize> = s.iter().copied().collect();
    let mut links: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..=n {
        let u = shortest_word(s, &links, i);
        if i < n {
            links.insert((i, i + 1));
        }
        let start = i - u.len();
        for &c in &alphabet {
            if i < n && c == s[i] {
                continue;
            }
            let mut w = u.clone();
            w.push(c);
            if let Some(end) = first_end(&s[start..], &w) {
                links.insert((i, start + end));
            }
        }
    }
    links
}

/// Shortest label sequence from the root to `target` (breadth-first).
fn shortest_word(s: &[usize], links: &BTreeSet<(usize, usize)>, target: usize) -> Vec<usize> {
    let mut prev: Vec<Option<usize>> = vec![None; s.len() + 1];
    let mut seen = vec![false; s.len() + 1];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &(_, y) in links.range((x, 0)..(x + 1, 0)) {
            if !seen[y] {
                seen[y] = true;
                prev[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    assert!(seen[target], "state {target} unreachable");
    let mut word = Vec::new();
    let mut x = target;
    while let Some(p) = prev[x] {
        word.push(s[x - 1]);
        x = p;
    }
    word.reverse();
    word
}

/// Every distinct factor of `s` with length in `1..=max_len`.
pub fn factors(s: &[usize], max_len: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for i in 0..s.len() {
        for l in 1..=max_len.min(s.len() - i) {
            out.insert(s[i..i + l].to_vec());
        }
    }
    out
}

/// Minimum total cost of matching every row of the shorter side, by
/// enumerating all injective maps. Costs are summed in row order.
pub fn brute_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return 0.0;
    }
    if n > m {
        let t: Vec<Vec<f64>> = (0..m)
            .map(|j| (0..n).map(|i| cost[i][j]).collect())
            .collect();
        return brute_assignment_rows(&t, true);
    }
    brute_assignment_rows(cost, false)
}

/// With `transposed`, the caller's rows are our columns, so the sum must
/// follow column order here to match a row-ordered sum on the original.
fn brute_assignment_rows(cost: &[Vec<f64>], transposed: bool) -> f64 {
    let mut best = f64::INFINITY;
    let mut pick = vec![usize::MAX; cost.len()];
    let mut used = vec![false; cost[0].len()];
    fn rec(
        cost: &[Vec<f64>],
        row: usize,
        pick: &mut [usize],
        used: &mut [bool],
        best: &mut f64,
        transposed: bool,
    ) {
        if row == cost.len() {
            let total = if transposed {
                let mut pairs: Vec<(usize, usize)> = pick.iter().copied().enumerate().collect();
                pairs.sort_by_key(|&(_, c)| c);
                pairs.iter().map(|&(r, c)| cost[r][c]).sum()
            } else {
                pick.iter().enumerate().map(|(r, &c)| cost[r][c]).sum()
            };
            if total < *best {
                *best = total;
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                pick[row] = c;
                rec(cost, row + 1, pick, used, best, transposed);
                used[c] = false;
            }
        }
    }
    rec(cost, 0, &mut pick, &mut used, &mut best, transposed);
    best
}
