//! Exhaustive generation of small nondegenerate finite quadratic modules,
//! deduplicated up to isomorphism. Backs the test suites.

use num_integer::Integer;

use super::Fqm;
use crate::exact::{rat, Rational};
use crate::linalg::QMat;

/// All invariant-factor chains `n_1 | n_2 | ... | n_k` with product `m`.
pub fn invariant_factor_chains(m: u64) -> Vec<Vec<u64>> {
    fn divisors(n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut d = 1;
        while d * d <= n {
            if n % d == 0 {
                out.push(d);
                if d != n / d {
                    out.push(n / d);
                }
            }
            d += 1;
        }
        out.sort_unstable();
        out
    }
    // Build from the last (largest) factor down.
    fn rec(rem: u64, cap: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rem == 1 {
            let mut chain = acc.clone();
            chain.reverse();
            out.push(chain);
            return;
        }
        for d in divisors(rem) {
            if d >= 2 && cap % d == 0 {
                acc.push(d);
                rec(rem / d, d, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    if m == 1 {
        out.push(Vec::new());
        return out;
    }
    let mut acc = Vec::new();
    rec(m, m, &mut acc, &mut out);
    out.sort();
    out.dedup();
    out
}

fn q_choices(n: u64) -> Vec<Rational> {
    // q(g) = a / (2n) with a*n even, i.e. a arbitrary mod 2n when n is
    // even and a even when n is odd.
    let step = if n % 2 == 0 { 1 } else { 2 };
    (0..2 * n)
        .step_by(step as usize)
        .map(|a| rat(a as i64, (2 * n) as i64))
        .collect()
}

fn pairing_choices(ni: u64, nj: u64) -> Vec<Rational> {
    let g = ni.gcd(&nj);
    (0..g).map(|b| rat(b as i64, g as i64)).collect()
}

/// Every nondegenerate finite quadratic module of the exact order `m`, one
/// representative per isomorphism class.
pub fn all_fqms_of_order(m: u64) -> Vec<Fqm> {
    if m == 1 {
        return vec![Fqm::trivial()];
    }
    let mut found: Vec<Fqm> = Vec::new();
    let mut keys: Vec<std::collections::BTreeMap<(u64, Rational), usize>> = Vec::new();
    for orders in invariant_factor_chains(m) {
        let k = orders.len();
        let per_gen: Vec<Vec<Rational>> = orders.iter().map(|&n| q_choices(n)).collect();
        let pair_slots: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        let per_pair: Vec<Vec<Rational>> = pair_slots
            .iter()
            .map(|&(i, j)| pairing_choices(orders[i], orders[j]))
            .collect();

        let mut q_idx = vec![0usize; k];
        'qloop: loop {
            let qvals: Vec<Rational> = q_idx
                .iter()
                .enumerate()
                .map(|(i, &t)| per_gen[i][t].clone())
                .collect();
            let mut p_idx = vec![0usize; pair_slots.len()];
            'ploop: loop {
                let mut gram: QMat = vec![vec![Rational::from_integer(0.into()); k]; k];
                for (i, q) in qvals.iter().enumerate() {
                    gram[i][i] = crate::exact::frac_mod1(&(q + q));
                }
                for (slot, &(i, j)) in pair_slots.iter().enumerate() {
                    let v = per_pair[slot][p_idx[slot]].clone();
                    gram[i][j] = v.clone();
                    gram[j][i] = v;
                }
                if let Ok(fqm) = Fqm::new(orders.clone(), qvals.clone(), gram) {
                    let key = super::element_invariants(&fqm);
                    let duplicate = keys
                        .iter()
                        .enumerate()
                        .filter(|(_, k2)| **k2 == key)
                        .any(|(idx, _)| found[idx].isomorphism_to(&fqm).is_some());
                    if !duplicate {
                        keys.push(key);
                        found.push(fqm);
                    }
                }
                // advance pairing indices
                let mut carry = true;
                for (slot, idx) in p_idx.iter_mut().enumerate() {
                    if !carry {
                        break;
                    }
                    *idx += 1;
                    if *idx < per_pair[slot].len() {
                        carry = false;
                    } else {
                        *idx = 0;
                    }
                }
                if carry {
                    break 'ploop;
                }
            }
            // advance q indices
            let mut carry = true;
            for (i, idx) in q_idx.iter_mut().enumerate() {
                if !carry {
                    break;
                }
                *idx += 1;
                if *idx < per_gen[i].len() {
                    carry = false;
                } else {
                    *idx = 0;
                }
            }
            if carry {
                break 'qloop;
            }
        }
    }
    found
}

/// All nondegenerate finite quadratic modules of order at most `max`, one
/// per isomorphism class (the trivial module included).
pub fn all_fqms_up_to(max: u64) -> Vec<Fqm> {
    (1..=max).flat_map(all_fqms_of_order).collect()
}


#[cfg(test)]
mod perf_probe {
    #[test]
    #[ignore]
    fn count_up_to_16() {
        let t = std::time::Instant::now();
        let forms = super::all_fqms_up_to(16);
        println!("classes up to order 16: {} in {:?}", forms.len(), t.elapsed());
        let t = std::time::Instant::now();
        let f64s = super::all_fqms_of_order(16);
        println!("order 16 alone: {} in {:?}", f64s.len(), t.elapsed());
    }
}
