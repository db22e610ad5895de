//! The O(1) simulator against the walk's definition.

use std::collections::BTreeMap;

use erws::moments::{oracle_table, PathView};
use erws::params::{validate, DerivedConstants};
use erws::simulator::{simulate_batch, simulate_path, step_law_at, CheckpointGrid};
use erws::stats::chi_square_sf;

/// Next-step law by drawing the remembered index k uniformly from the
/// history and copying (p), negating (q) or zeroing (r) X_k.
fn law_from_history(hist: &[i8], c: &DerivedConstants) -> (f64, f64, f64) {
    let (p, q, r) = (c.params.p, c.params.q, c.params.r);
    let (mut plus, mut minus, mut zero) = (0.0, 0.0, 0.0);
    let w = 1.0 / hist.len() as f64;
    for &x in hist {
        match x {
            1 => {
                plus += w * p;
                minus += w * q;
                zero += w * r;
            }
            -1 => {
                plus += w * q;
                minus += w * p;
                zero += w * r;
            }
            _ => zero += w,
        }
    }
    (plus, minus, zero)
}

fn histories(n: usize) -> Vec<Vec<i8>> {
    let mut out: Vec<Vec<i8>> = vec![vec![1], vec![-1]];
    for _ in 1..n {
        out = out
            .into_iter()
            .flat_map(|h| {
                [1i8, -1, 0].into_iter().map(move |x| {
                    let mut g = h.clone();
                    g.push(x);
                    g
                })
            })
            .collect();
    }
    out
}

#[test]
fn step_law_matches_uniform_past_index() {
    for (p, q, r) in [(0.5, 0.2, 0.3), (0.7, 0.1, 0.2), (0.1, 0.8, 0.1), (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)] {
        let c = validate(p, q, r, 0.5).unwrap();
        for n in 1..=6 {
            for h in histories(n) {
                let s: i64 = h.iter().map(|&x| x as i64).sum();
                let sigma = h.iter().filter(|&&x| x != 0).count() as u64;
                let law = step_law_at(n as u64, s, sigma, &c);
                let (plus, minus, zero) = law_from_history(&h, &c);
                assert!((law.plus - plus).abs() < 1e-15, "{h:?}");
                assert!((law.minus - minus).abs() < 1e-15, "{h:?}");
                assert!((law.zero - zero).abs() < 1e-15, "{h:?}");
                assert!((law.plus + law.minus + law.zero - 1.0).abs() <= f64::EPSILON);
            }
        }
    }
}

/// Exact law of (S_n, Σ_n) from path enumeration.
fn exact_law(c: &DerivedConstants, n: u64) -> BTreeMap<(i64, u64), f64> {
    let mut cells = Vec::new();
    for sigma in 1..=n {
        let mut s = -(sigma as i64);
        while s <= sigma as i64 {
            cells.push((s, sigma));
            s += 2;
        }
    }
    let fns: Vec<Box<dyn Fn(&PathView) -> f64 + Sync>> = cells
        .iter()
        .map(|&(s, sg)| Box::new(move |p: &PathView| (p.s == s && p.sigma == sg) as u8 as f64) as Box<_>)
        .collect();
    let refs: Vec<&(dyn Fn(&PathView) -> f64 + Sync)> = fns.iter().map(|f| f.as_ref()).collect();
    let table = oracle_table(c, n, &refs).unwrap();
    cells.into_iter().zip(table[n as usize - 1].iter().copied()).collect()
}

#[test]
fn simulated_law_passes_chi_square() {
    const R: usize = 1_000_000;
    for (k, (p, q, r, s)) in [(0.5, 0.2, 0.3, 0.7), (0.7, 0.1, 0.2, 0.5), (0.2, 0.5, 0.3, 0.9)].into_iter().enumerate() {
        let c = validate(p, q, r, s).unwrap();
        let horizons: Vec<u64> = (2..=6).collect();
        let rows = simulate_batch(&c, 1000 + k as u64, 0, R, &horizons).unwrap();
        for (j, &n) in horizons.iter().enumerate() {
            let law = exact_law(&c, n);
            let mut counts: BTreeMap<(i64, u64), f64> = BTreeMap::new();
            for row in &rows {
                *counts.entry(row[j]).or_default() += 1.0;
            }
            for cell in counts.keys() {
                assert!(law.get(cell).is_some_and(|&pr| pr > 0.0), "impossible cell {cell:?}");
            }
            // Pool cells with fewer than 5 expected counts.
            let (mut stat, mut dof, mut pool_obs, mut pool_exp) = (0.0, 0.0, 0.0, 0.0);
            for (cell, &pr) in &law {
                let e = pr * R as f64;
                let o = counts.get(cell).copied().unwrap_or(0.0);
                if e < 5.0 {
                    pool_obs += o;
                    pool_exp += e;
                } else {
                    stat += (o - e) * (o - e) / e;
                    dof += 1.0;
                }
            }
            if pool_exp > 0.0 {
                stat += (pool_obs - pool_exp).powi(2) / pool_exp.max(1e-300);
                dof += 1.0;
            }
            let pval = chi_square_sf(stat, dof - 1.0).unwrap();
            assert!(pval > 1e-3, "n={n} params={:?}: chi2={stat} dof={} p={pval}", c.params, dof - 1.0);
        }
    }
}

#[test]
fn deterministic_special_cases() {
    let c = validate(0.6, 0.4, 0.0, 0.5).unwrap();
    let rec = simulate_path(&c.params, 100_000, 3, 9, &CheckpointGrid::default()).unwrap();
    for cp in &rec.checkpoints {
        assert_eq!(cp.sigma, cp.n);
    }
    let c = validate(1.0, 0.0, 0.0, 1.0).unwrap();
    let rec = simulate_path(&c.params, 100_000, 3, 9, &CheckpointGrid::Dense { every: 997 }).unwrap();
    for cp in &rec.checkpoints {
        assert_eq!(cp.s, cp.n as i64);
    }
}

#[test]
fn single_stepper_keeps_invariants() {
    use erws::simulator::init_walk;
    let c = validate(0.45, 0.3, 0.25, 0.4).unwrap();
    let mut st = init_walk(&c.params, 77, 0).unwrap();
    let mut prev = (st.s, st.sigma);
    for _ in 0..1_000_000 {
        let dx = st.step(&c);
        assert!((-1..=1).contains(&dx));
        st.check().unwrap();
        assert_eq!(st.s - prev.0, dx as i64);
        assert!(st.sigma >= prev.1);
        prev = (st.s, st.sigma);
    }
}
