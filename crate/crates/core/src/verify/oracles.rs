//! Brute-force reference computations for the acceptance suite. Nothing in
//! here uses the rest of the crate: permutations are plain byte vectors and
//! every count is found by exhaustive search.

use std::collections::HashMap;

pub(crate) type Perm = Vec<u8>;

pub(crate) fn all_perms(n: usize) -> Vec<Perm> {
    fn rec(prefix: &mut Perm, used: &mut Vec<bool>, out: &mut Vec<Perm>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x as u8);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `p` then `q`.
pub(crate) fn then(p: &[u8], q: &[u8]) -> Perm {
    p.iter().map(|&x| q[x as usize]).collect()
}

pub(crate) fn inv(p: &[u8]) -> Perm {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x as usize] = i as u8;
    }
    out
}

/// `a⁻¹ b⁻¹ a b`, applied left to right.
pub(crate) fn comm(a: &[u8], b: &[u8]) -> Perm {
    then(&then(&then(&inv(a), &inv(b)), a), b)
}

/// Sorted cycle lengths, largest first.
pub(crate) fn cycle_type(p: &[u8]) -> Vec<u32> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        if len > 0 {
            out.push(len);
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

fn is_identity(p: &[u8]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x as usize)
}

/// `#{(a₁, b₁, a₂, b₂) : [a₁,b₁][a₂,b₂] = 1}` by visiting every 4-tuple.
pub(crate) fn genus_two_hom_count(n: usize) -> u64 {
    let g = all_perms(n);
    let comms: Vec<Vec<Perm>> = g.iter().map(|a| g.iter().map(|b| comm(a, b)).collect()).collect();
    let mut count = 0;
    for a1 in 0..g.len() {
        for b1 in 0..g.len() {
            let c1 = &comms[a1][b1];
            for a2 in 0..g.len() {
                for b2 in 0..g.len() {
                    if is_identity(&then(c1, &comms[a2][b2])) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// For one representative `σ` of each cycle type, `#{(a, b) : [a, b] = σ}`.
pub(crate) fn commutator_counts(n: usize) -> HashMap<Vec<u32>, u64> {
    let g = all_perms(n);
    let mut reps: HashMap<Vec<u32>, Perm> = HashMap::new();
    for p in &g {
        reps.entry(cycle_type(p)).or_insert_with(|| p.clone());
    }
    let mut out: HashMap<Vec<u32>, u64> = reps.keys().map(|k| (k.clone(), 0)).collect();
    for a in &g {
        for b in &g {
            let c = comm(a, b);
            let t = cycle_type(&c);
            if reps[&t] == c {
                *out.get_mut(&t).expect("all types present") += 1;
            }
        }
    }
    out
}

/// Character table of `S_5` as printed in standard references, keyed by
/// `(λ, μ)`.
pub(crate) fn s5_character_table() -> HashMap<(Vec<u32>, Vec<u32>), i64> {
    let classes: [&[u32]; 7] = [
        &[1, 1, 1, 1, 1],
        &[2, 1, 1, 1],
        &[2, 2, 1],
        &[3, 1, 1],
        &[3, 2],
        &[4, 1],
        &[5],
    ];
    let rows: [(&[u32], [i64; 7]); 7] = [
        (&[5], [1, 1, 1, 1, 1, 1, 1]),
        (&[4, 1], [4, 2, 0, 1, -1, 0, -1]),
        (&[3, 2], [5, 1, 1, -1, 1, -1, 0]),
        (&[3, 1, 1], [6, 0, -2, 0, 0, 0, 1]),
        (&[2, 2, 1], [5, -1, 1, -1, -1, 1, 0]),
        (&[2, 1, 1, 1], [4, -2, 0, 1, 1, 0, -1]),
        (&[1, 1, 1, 1, 1], [1, -1, 1, 1, -1, -1, 1]),
    ];
    let mut out = HashMap::new();
    for (lambda, values) in rows {
        for (mu, v) in classes.iter().zip(values) {
            out.insert((lambda.to_vec(), mu.to_vec()), v);
        }
    }
    out
}

/// Number of set partitions of an `m`-set, by listing restricted growth
/// strings.
pub(crate) fn bell_by_enumeration(m: usize) -> u64 {
    fn rec(pos: usize, m: usize, max: usize) -> u64 {
        if pos == m {
            return 1;
        }
        (0..=max + 1).map(|b| rec(pos + 1, m, max.max(b))).sum()
    }
    if m == 0 {
        return 1;
    }
    // the first element always opens block 0
    rec(1, m, 0)
}

pub(crate) fn divisor_count(a: u32) -> u32 {
    (1..=a).filter(|d| a % d == 0).count() as u32
}
