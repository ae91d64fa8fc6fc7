//! Permutation enumeration helpers.

/// Advances `perm` to the next permutation in lexicographic order, returning
/// `false` (and leaving `perm` sorted ascending) after the last one.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let len = perm.len();
    if len < 2 {
        return false;
    }
    let mut i = len - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = len - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All permutations of `0..len` in lexicographic order.
pub fn permutations(len: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..len).collect();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// `len!`, saturating at `u128::MAX`.
pub fn factorial(len: usize) -> u128 {
    (1..=len as u128).try_fold(1u128, |acc, k| acc.checked_mul(k)).unwrap_or(u128::MAX)
}

/// Number of ordered pairs `t < t'` among `n` positions that disagree
/// between `order` and `ranking` (Kendall tau distance).
pub fn kendall_tau(order: &[usize], ranking: &[usize]) -> usize {
    let mut pos = vec![0; ranking.len()];
    for (k, &x) in ranking.iter().enumerate() {
        pos[x] = k;
    }
    let mut count = 0;
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if pos[order[b]] < pos[order[a]] {
                count += 1;
            }
        }
    }
    count
}
