//! Exhaustive-enumeration oracles for the dynamic programming passes.
//!
//! Every expected value here is recomputed from the definition: a sum or
//! max over all state paths with products taken in the linear domain.
//! Path counts stay small enough to enumerate directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use stagemux_core::hmm::{forward_log_prob, viterbi_decode};
use stagemux_core::{HmmTemplate, Obs};

const TOL: f64 = 1e-9;

/// Raw matrices the oracle walks, independent of the template type.
struct Dense {
    n: usize,
    cols: usize,
    pi: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Dense {
    fn path_product(&self, path: &[usize], obs: &[usize]) -> f64 {
        let mut p = self.pi[path[0]] * self.b[path[0] * self.cols + obs[0]];
        for t in 1..path.len() {
            p *= self.a[path[t - 1] * self.n + path[t]] * self.b[path[t] * self.cols + obs[t]];
        }
        p
    }
}

/// Calls `f` with every length-`len` path over `n` states, in ascending
/// lexicographic order.
fn for_each_path(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; len];
    'outer: loop {
        f(&path);
        for k in (0..len).rev() {
            path[k] += 1;
            if path[k] < n {
                continue 'outer;
            }
            path[k] = 0;
        }
        return;
    }
}

/// Everything the enumeration can tell us about one observation sequence.
struct Enumerated {
    total: f64,
    best: f64,
    best_paths: Vec<Vec<usize>>,
    gamma: Vec<Vec<f64>>,
}

fn enumerate(d: &Dense, obs: &[usize]) -> Enumerated {
    let t_len = obs.len();
    let mut total = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut scored: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut gamma_sums = vec![vec![0.0; d.n]; t_len];
    for_each_path(d.n, t_len, |path| {
        let p = d.path_product(path, obs);
        total += p;
        for (t, &q) in path.iter().enumerate() {
            gamma_sums[t][q] += p;
        }
        if p > best {
            best = p;
        }
        scored.push((path.to_vec(), p));
    });
    let best_paths = scored
        .into_iter()
        .filter(|&(_, p)| p >= best * (1.0 - 1e-12))
        .map(|(path, _)| path)
        .collect();
    let gamma = gamma_sums
        .into_iter()
        .map(|row| row.iter().map(|&s| s / total).collect())
        .collect();
    Enumerated {
        total,
        best,
        best_paths,
        gamma,
    }
}

/// Random row-stochastic matrix with entries bounded away from zero so
/// no path degenerates and no two paths land within float noise.
fn random_rows(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let raw: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        m.extend(raw.into_iter().map(|x| x / sum));
    }
    m
}

/// Random upper-triangular row-stochastic matrix (left-right transitions).
fn random_left_right_rows(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        let raw: Vec<f64> = (i..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        for (k, x) in raw.into_iter().enumerate() {
            m[i * n + (i + k)] = x / sum;
        }
    }
    m
}

fn check_against_oracle(tmpl: &HmmTemplate, obs: &[usize]) {
    let d = Dense {
        n: tmpl.n_states(),
        cols: tmpl.b_cols(),
        pi: tmpl.pi().to_vec(),
        a: tmpl.a_matrix().to_vec(),
        b: tmpl.b_matrix().to_vec(),
    };
    let oracle = enumerate(&d, obs);
    let wrapped = Obs::seq(obs);

    let logp = forward_log_prob(tmpl, &wrapped).unwrap();
    assert!(
        (logp - oracle.total.ln()).abs() < TOL,
        "forward {} vs oracle {}",
        logp,
        oracle.total.ln()
    );

    let post = viterbi_decode(tmpl, &wrapped).unwrap();
    assert!(
        (post.path_log_prob - oracle.best.ln()).abs() < TOL,
        "viterbi score {} vs oracle {}",
        post.path_log_prob,
        oracle.best.ln()
    );
    assert!(
        oracle.best_paths.contains(&post.path),
        "path {:?} not among maximizers {:?}",
        post.path,
        oracle.best_paths
    );
    assert!((post.seq_log_prob - logp).abs() < TOL);

    for (t, row) in post.gamma.iter().enumerate() {
        for (i, &g) in row.iter().enumerate() {
            assert!(
                (g - oracle.gamma[t][i]).abs() < TOL,
                "gamma[{}][{}] {} vs oracle {}",
                t,
                i,
                g,
                oracle.gamma[t][i]
            );
        }
    }
}

#[test]
fn random_dense_models_match_path_enumeration() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x0dac1e);
    for n in 1..=4usize {
        for m in 2..=3usize {
            for t_len in [1usize, 3, 5] {
                for _ in 0..3 {
                    let pi = random_rows(&mut rng, 1, n);
                    let a = random_rows(&mut rng, n, n);
                    let b = random_rows(&mut rng, n, m);
                    let tmpl = HmmTemplate::new("oracle", pi, a, b, m, false).unwrap();
                    let obs: Vec<usize> = (0..t_len).map(|_| rng.gen_range(0..m)).collect();
                    check_against_oracle(&tmpl, &obs);
                }
            }
        }
    }
}

#[test]
fn random_left_right_models_match_path_enumeration() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x0dac2e);
    for n in 2..=4usize {
        for t_len in [2usize, 4, 6] {
            for _ in 0..4 {
                let mut pi = vec![0.0; n];
                pi[0] = 1.0;
                let a = random_left_right_rows(&mut rng, n);
                let b = random_rows(&mut rng, n, 3);
                let tmpl = HmmTemplate::new("oracle-lr", pi, a, b, 3, true).unwrap();
                let obs: Vec<usize> = (0..t_len).map(|_| rng.gen_range(0..3)).collect();
                check_against_oracle(&tmpl, &obs);
            }
        }
    }
}

#[test]
fn modified_template_all_unrelated_has_closed_form_score() {
    // Only the all-zeros path can emit the unrelated symbol, so the
    // sequence probability collapses to pi0 * e1^T * a00^(T-1).
    let a00 = 0.7;
    let base = HmmTemplate::new(
        "closed-form",
        vec![1.0, 0.0, 0.0],
        vec![a00, 0.2, 0.1, 0.0, 0.6, 0.4, 0.0, 0.0, 1.0],
        vec![0.8, 0.2, 0.3, 0.7, 0.1, 0.9],
        2,
        true,
    )
    .unwrap();
    let eps1 = 1e-6;
    let tmpl = base.apply_epsilon_modification(eps1, 0.001).unwrap();
    let unrelated = tmpl.unrelated_symbol();
    for t_len in 1..=8usize {
        let obs = Obs::seq(&vec![unrelated; t_len]);
        // Row 0 of the transition matrix is untouched by the modification,
        // so the self-loop keeps its original mass.
        let expected = t_len as f64 * eps1.ln() + (t_len - 1) as f64 * a00.ln();
        let got = forward_log_prob(&tmpl, &obs).unwrap();
        assert!(
            (got - expected).abs() < TOL,
            "T={}: {} vs {}",
            t_len,
            got,
            expected
        );
        let post = viterbi_decode(&tmpl, &obs).unwrap();
        assert_eq!(post.path, vec![0; t_len]);
    }
}

#[test]
fn exact_tie_prefers_lowest_final_state_then_lowest_predecessor() {
    // Powers of two make the two maximizing paths tie exactly. The
    // backtrack resolves from the end: lowest final state wins, then
    // the lowest predecessor, so [1, 0] beats [0, 1].
    let pi = vec![0.5, 0.5, 0.0];
    let a = vec![0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0];
    let b = vec![0.5, 0.5, 0.5, 0.5, 0.75, 0.25];
    let tmpl = HmmTemplate::new("tie", pi, a, b, 2, false).unwrap();
    let obs = Obs::seq(&[0, 1]);

    let d = Dense {
        n: 3,
        cols: 2,
        pi: tmpl.pi().to_vec(),
        a: tmpl.a_matrix().to_vec(),
        b: tmpl.b_matrix().to_vec(),
    };
    let oracle = enumerate(&d, &[0, 1]);
    assert_eq!(oracle.best_paths, vec![vec![0, 1], vec![1, 0]]);

    let post = viterbi_decode(&tmpl, &obs).unwrap();
    assert_eq!(post.path, vec![1, 0]);
    assert!((post.path_log_prob - oracle.best.ln()).abs() < TOL);
}
