//! Seeded randomized check suites.
//!
//! Trial `t` of a run with seed `s` draws everything from `ChaCha8(s + t)`,
//! so trials are independent and can run on any thread. Results are folded
//! in trial order with max/sum, which does not depend on scheduling.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wedderburn::linalg::{product_rank_tol, spectral_norm};
use wedderburn::lowrank::IndexSet;
use wedderburn::projector::{
    idempotency_tol, join, lattice_scale, meet, oblique_projector, rol_projector_classification,
};
use wedderburn::reduction::{reduce, reduction_noise, reduction_term, CoreParts};
use wedderburn::sketch::{self, below};
use wedderburn::{
    generalized_reduce, nullspace_basis, numerical_rank, pinv, range_basis, subspaces_equal, svd,
    Matrix, Projector, Tolerances,
};

use crate::report::JsonReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Rank identity on dense and sparse random instances.
    Wedderburn,
    /// Reduction by range-matched singular subspaces.
    SvdIndexed,
    /// Reduction unchanged when Y is widened to Y R.
    YAugment,
    /// Oblique projector formula.
    Projection,
    /// Reverse order law characterizations agree.
    Rol,
    /// Meet and join of commuting projections.
    Meetjoin,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Wedderburn => "wedderburn",
            Suite::SvdIndexed => "svd-indexed",
            Suite::YAugment => "y-augment",
            Suite::Projection => "projection",
            Suite::Rol => "rol",
            Suite::Meetjoin => "meetjoin",
            Suite::All => "all",
        }
    }

    fn trial_fn(self) -> fn(&mut ChaCha8Rng, &Tolerances, &mut Trial) {
        match self {
            Suite::Wedderburn => wedderburn_trial,
            Suite::SvdIndexed => svd_indexed_trial,
            Suite::YAugment => y_augment_trial,
            Suite::Projection => projection_trial,
            Suite::Rol => rol_trial,
            Suite::Meetjoin => meetjoin_trial,
            Suite::All => unreachable!("expanded by run_suite"),
        }
    }
}

const SUITES: [Suite; 6] = [
    Suite::Wedderburn,
    Suite::SvdIndexed,
    Suite::YAugment,
    Suite::Projection,
    Suite::Rol,
    Suite::Meetjoin,
];

/// Largest dimension drawn by the random suites.
pub const MAX_DIM: usize = 12;
const SPARSE_DENSITY: f64 = 0.01;
const MAX_REDRAWS: u64 = 1_000_000;
/// Notes kept per suite; further failures are only counted.
const MAX_NOTES: usize = 10;

/// Per-trial outcome. `asserted` values are already divided by their scale
/// and are compared against the residual tolerance.
#[derive(Debug, Default)]
struct Trial {
    asserted: Vec<(&'static str, f64)>,
    observed: Vec<(&'static str, f64)>,
    counts: Vec<(&'static str, u64)>,
    failures: Vec<String>,
}

impl Trial {
    fn assert(&mut self, name: &'static str, v: f64) {
        self.asserted.push((name, v));
    }

    fn observe(&mut self, name: &'static str, v: f64) {
        self.observed.push((name, v));
    }

    fn count(&mut self, name: &'static str, n: u64) {
        self.counts.push((name, n));
    }

    fn fail(&mut self, note: String) {
        self.failures.push(note);
    }

    fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.fail(what.to_string());
        }
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, tol: &Tolerances, report: &mut JsonReport) {
    let suites: Vec<Suite> = if suite == Suite::All { SUITES.to_vec() } else { vec![suite] };
    let prefixed = suites.len() > 1;
    report.count("trials", trials as u64);
    for s in suites {
        let f = s.trial_fn();
        let results: Vec<Trial> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut r = sketch::rng(seed.wrapping_add(t));
                let mut out = Trial::default();
                f(&mut r, tol, &mut out);
                out
            })
            .collect();
        fold(s.name(), prefixed, results, tol.residual, report);
    }
}

fn fold(name: &str, prefixed: bool, results: Vec<Trial>, bound: f64, report: &mut JsonReport) {
    let key = |k: &str| if prefixed { format!("{name}.{k}") } else { k.to_string() };
    let mut asserted: BTreeMap<&str, f64> = BTreeMap::new();
    let mut observed: BTreeMap<&str, f64> = BTreeMap::new();
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut failed = 0u64;
    for (t, trial) in results.into_iter().enumerate() {
        for (k, v) in trial.asserted {
            let e = asserted.entry(k).or_insert(0.0);
            // NaN must not vanish in the max
            *e = if v.is_nan() { v } else { e.max(v) };
        }
        for (k, v) in trial.observed {
            let e = observed.entry(k).or_insert(0.0);
            *e = e.max(v);
        }
        for (k, n) in trial.counts {
            *counts.entry(k).or_insert(0) += n;
        }
        if !trial.failures.is_empty() {
            failed += 1;
            if failed as usize <= MAX_NOTES {
                report.fail(format!("{name} trial {t}: {}", trial.failures.join("; ")));
            }
        }
    }
    for (k, v) in asserted {
        report.assert_within(&key(k), v, bound);
    }
    for (k, v) in observed {
        report.residual(&key(k), v);
    }
    for (k, n) in counts {
        report.count(&key(k), n);
    }
    report.count(&key("failed_trials"), failed);
    if failed as usize > MAX_NOTES {
        report.fail(format!("{name}: {failed} failing trials in total"));
    }
}

fn dim(r: &mut ChaCha8Rng) -> usize {
    1 + below(r, MAX_DIM)
}

/// Rank in `0..=max`, with full and zero rank both likely.
fn random_rank(r: &mut ChaCha8Rng, max: usize) -> usize {
    match below(r, 4) {
        0 => max,
        1 => 0,
        _ => below(r, max + 1),
    }
}

fn rank_deviation_of(a: &Matrix, x: &Matrix, y: &Matrix, tol: &Tolerances, trial: &mut Trial) -> Option<i64> {
    match generalized_reduce(a, x, y, tol) {
        Ok(rep) => Some(rep.rank_deviation()),
        Err(e) => {
            trial.fail(format!("reduction failed: {e}"));
            None
        }
    }
}

fn wedderburn_trial(r: &mut ChaCha8Rng, tol: &Tolerances, trial: &mut Trial) {
    let (m, n, p, q) = (dim(r), dim(r), dim(r), dim(r));
    let (ra, rx, ry) = (random_rank(r, m.min(n)), random_rank(r, n.min(p)), random_rank(r, m.min(q)));
    let a = sketch::low_rank(r, m, n, ra);
    let x = sketch::low_rank(r, n, p, rx);
    let y = sketch::low_rank(r, m, q, ry);
    if let Some(d) = rank_deviation_of(&a, &x, &y, tol, trial) {
        trial.observe("max_rank_deviation", d.unsigned_abs() as f64);
        trial.require(d == 0, &format!("dense rank identity off by {d}"));
    }

    // nonnegative A with sparse X, Y, redrawn until Y^T A X is nonzero
    let rank = dim(r);
    let a = &sketch::uniform(r, m, rank) * &sketch::uniform(r, rank, n);
    let mut redraws = 0u64;
    let (x, y) = loop {
        let x = sketch::sparse_uniform(r, n, p, SPARSE_DENSITY);
        let y = sketch::sparse_uniform(r, m, q, SPARSE_DENSITY);
        if numerical_rank(&(&(&y.transpose() * &a) * &x), tol.rank) >= 1 {
            break (x, y);
        }
        redraws += 1;
        if redraws == MAX_REDRAWS {
            trial.fail("sparse sketches stayed degenerate".into());
            return;
        }
    };
    trial.count("regenerations", redraws);
    if let Some(d) = rank_deviation_of(&a, &x, &y, tol, trial) {
        trial.observe("max_sparse_rank_deviation", d.unsigned_abs() as f64);
        trial.require(d == 0, &format!("sparse rank identity off by {d}"));
    }
}

fn svd_indexed_trial(r: &mut ChaCha8Rng, tol: &Tolerances, trial: &mut Trial) {
    let (m, n) = (2 + below(r, MAX_DIM - 1), 2 + below(r, MAX_DIM - 1));
    let rank = 2 + below(r, m.min(n) - 1);
    let a = &sketch::uniform(r, m, rank) * &sketch::uniform(r, rank, n);
    let f = match svd(&a) {
        Ok(f) => f,
        Err(e) => return trial.fail(format!("svd failed: {e}")),
    };
    let k = 1 + below(r, rank - 1);
    let i = sketch::subset(r, rank, k);
    let (p, q) = (1 + below(r, k), 1 + below(r, k));
    let x = &f.v_columns(&i) * &sketch::uniform(r, k, k + p);
    let y = &f.u_columns(&i) * &sketch::uniform(r, k, k + q);
    let term = match reduction_term(&a, &x, &y, tol) {
        Ok(t) => t,
        Err(e) => return trial.fail(format!("reduction failed: {e}")),
    };
    let sigma_1 = f.sigma_max();
    trial.assert("max_term_error", term.distance(&f.partial_sum(&i)) / sigma_1);

    let kept: Vec<f64> = IndexSet::new(i)
        .expect("subset is sorted")
        .complement(rank)
        .iter()
        .map(|&j| f.sigma[j])
        .collect();
    let reduced = match svd(&(&a - &term)) {
        Ok(s) => s.sigma,
        Err(e) => return trial.fail(format!("svd failed: {e}")),
    };
    let dev = reduced
        .iter()
        .enumerate()
        .map(|(j, s)| (s - kept.get(j).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    trial.assert("max_singular_value_error", dev / sigma_1);
}

fn y_augment_trial(r: &mut ChaCha8Rng, tol: &Tolerances, trial: &mut Trial) {
    // p >= q makes rank(Y^T A X) = rank(Y^T A) generically, the condition
    // under which widening Y cannot change the removed term
    let (m, n, rank, q) = (dim(r), dim(r), dim(r), dim(r));
    let p = q + below(r, MAX_DIM - q + 1);
    let a = &sketch::uniform(r, m, rank) * &sketch::uniform(r, rank, n);
    let x = sketch::uniform(r, n, p);
    let y = sketch::uniform(r, m, q);
    let wide = &y * &sketch::uniform(r, q, 2 * q);
    let scale = a.frobenius_norm().max(1.0);
    let (b, bb) = match (reduce(&a, &x, &y, tol), reduce(&a, &x, &wide, tol)) {
        (Ok(b), Ok(bb)) => (b, bb),
        (Err(e), _) | (_, Err(e)) => return trial.fail(format!("reduction failed: {e}")),
    };
    let change = b.distance(&bb) / scale;
    trial.observe("max_b_change", change);
    // each side carries the rounding the rank threshold for B is built
    // from; ill-conditioned positive draws can push it past the tolerance
    let noise = |y: &Matrix| CoreParts::new(&a, &x, y, tol).map(|parts| reduction_noise(&a, &x, y, &parts));
    let (n1, n2) = match (noise(&y), noise(&wide)) {
        (Ok(n1), Ok(n2)) => (n1, n2),
        (Err(e), _) | (_, Err(e)) => return trial.fail(format!("reduction failed: {e}")),
    };
    let allowance = ((n1 + n2) / (scale * tol.residual)).max(1.0);
    trial.assert("max_scaled_b_change", change / allowance);
    let ya = &y.transpose() * &a;
    let hypothesis = numerical_rank(&(&ya * &x), tol.rank) == numerical_rank(&ya, tol.rank);
    trial.require(hypothesis, "rank(Y^T A X) < rank(Y^T A) for a dense draw");

    // the sparse draw, where the condition often fails; observed only
    let x = sketch::sparse_uniform(r, n, p, SPARSE_DENSITY);
    let y = sketch::sparse_uniform(r, m, q, SPARSE_DENSITY);
    let wide = &y * &sketch::uniform(r, q, 2 * q);
    if let (Ok(b), Ok(bb)) = (reduce(&a, &x, &y, tol), reduce(&a, &x, &wide, tol)) {
        let ya = &y.transpose() * &a;
        let holds = numerical_rank(&(&ya * &x), tol.rank) == numerical_rank(&ya, tol.rank);
        trial.count("sparse_rank_condition_fails", u64::from(!holds));
        trial.observe("max_sparse_b_change", b.distance(&bb) / scale);
    }
}

fn projection_trial(r: &mut ChaCha8Rng, tol: &Tolerances, trial: &mut Trial) {
    let (n, p, q) = (dim(r), dim(r), dim(r));
    let (ra, rb) = (random_rank(r, n.min(p)), random_rank(r, n.min(q)));
    let a = sketch::low_rank(r, n, p, ra);
    let b = sketch::low_rank(r, n, q, rb);
    let proj = match oblique_projector(&a, &b, tol) {
        Ok(p) => p,
        Err(e) => return trial.fail(format!("projector failed: {e}")),
    };
    let pm = proj.matrix();
    let idem = (pm * pm).distance(pm);
    // idempotency_tol is the residual tolerance times the scale
    trial.assert("max_idempotency", idem / idempotency_tol(pm, 1.0));
    // the products are ranked against their factors, not their own norm,
    // since they can be small by cancellation
    let (na, nb) = (spectral_norm(&a), spectral_norm(&b));
    let bta = &b.transpose() * &a;
    let rank_bta = numerical_rank(&bta, Some(product_rank_tol(&bta, na * nb, n, tol.rank)));
    trial.require(proj.trace_rank() == rank_bta, "round(trace P) != rank(B^T A)");
    let at = a.transpose();
    let aab = &(&a * &at) * &b;
    let abb = &(&at * &b) * &b.transpose();
    let range = range_basis(&aab, Some(product_rank_tol(&aab, na * na * nb, n, tol.rank)));
    let null = nullspace_basis(&abb, Some(product_rank_tol(&abb, na * nb * nb, n, tol.rank)));
    let range_ok = subspaces_equal(proj.range(), &range, tol.subspace).unwrap_or(false);
    let null_ok = subspaces_equal(proj.nullspace(), &null, tol.subspace).unwrap_or(false);
    trial.require(range_ok, "R(P) != R(A A^T B)");
    trial.require(null_ok, "N(P) != N(A^T B B^T)");
}

fn rol_trial(r: &mut ChaCha8Rng, tol: &Tolerances, trial: &mut Trial) {
    let (m, n, k) = (dim(r), dim(r), dim(r));
    let ra = random_rank(r, m.min(n));
    let a = sketch::low_rank(r, m, n, ra);
    let b = if below(r, 4) == 0 {
        a.transpose()
    } else {
        let rb = random_rank(r, n.min(k));
        sketch::low_rank(r, n, k, rb)
    };
    match rol_projector_classification(&a, &b, tol) {
        Ok(c) => {
            trial.count("law_holds", u64::from(c.rol_holds));
            trial.require(c.consistent(), "characterizations disagree");
        }
        Err(e) => trial.fail(format!("classification failed: {e}")),
    }
}

fn commuting_pair(r: &mut ChaCha8Rng, n: usize, orthogonal: bool, tol: &Tolerances) -> Option<(Projector, Projector)> {
    let s = if orthogonal {
        svd(&sketch::uniform_symmetric(r, n, n)).ok()?.u
    } else {
        sketch::uniform_symmetric(r, n, n)
    };
    let s_inv = pinv(&s);
    let make = |r: &mut ChaCha8Rng| {
        let d: Vec<f64> = (0..n).map(|_| below(r, 2) as f64).collect();
        Projector::new(&(&s * &Matrix::from_diagonal(n, n, &d)) * &s_inv, tol).ok()
    };
    Some((make(r)?, make(r)?))
}

fn meetjoin_trial(r: &mut ChaCha8Rng, tol: &Tolerances, trial: &mut Trial) {
    let n = 1 + below(r, 8);
    for orthogonal in [false, true] {
        let Some((p, q)) = commuting_pair(r, n, orthogonal, tol) else {
            // a near-singular similarity; not a property failure
            trial.count("skipped_pairs", 1);
            continue;
        };
        let scale = lattice_scale(&p, &q);
        match (join(&p, &q, tol), meet(&p, &q, tol)) {
            (Ok(j), Ok(mt)) => {
                // E carries its own idempotency error and the commutator, both
                // multiplied by E in these products
                let mut absorb = 0.0f64;
                for e in [p.matrix(), q.matrix()] {
                    let d = (j.matrix() * e)
                        .distance(e)
                        .max((mt.matrix() * e).distance(mt.matrix()));
                    absorb = absorb.max(d / (scale * (1.0 + e.frobenius_norm())));
                }
                trial.assert("max_absorption", absorb);
                trial.require(
                    j.rank() + mt.rank() == p.rank() + q.rank(),
                    "rank(P v Q) + rank(P ^ Q) != rank P + rank Q",
                );
            }
            (Err(e), _) | (_, Err(e)) => trial.fail(format!("lattice operation failed: {e}")),
        }
    }
}



