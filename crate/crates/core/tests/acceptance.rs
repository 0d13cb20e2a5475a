//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so the PASS/FAIL lines are always shown.
//! Criterion 8 needs a real 48-bank roster and scenario, supplied through
//! `CONTAGION_EBA_BANKS` and `CONTAGION_EBA_SCENARIO`; without them it is
//! reported as skipped.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use contagion::cascade::{run_cascade, FailureParams, ShockScenario};
use contagion::model::{
    balance_sheet_equity, capital_ratios, equity_values, interdependency, FractionMatrix,
    PortfolioMatrix,
};
use contagion::netstats::network_statistics;
use contagion::pipeline::{run_pipeline, RunConfig, StressReport};
use contagion::reconstruct::{
    reconstruct_anan, reconstruct_maxe, validate_marginals, ExposureMatrix, Marginals, Method,
    MAXE_MAX_ITER, MAXE_TOL,
};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

type Criterion = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Outcome::Fail(format!($($fmt)+));
        }
    };
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn random_network(rng: &mut ChaCha8Rng, n: usize, links: usize) -> ExposureMatrix {
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    pairs.shuffle(rng);
    let mut x = DMatrix::zeros(n, n);
    for &(i, j) in &pairs[..links] {
        x[(i, j)] = rng.random_range(0.5..100.0);
    }
    ExposureMatrix::from_matrix(x).unwrap()
}

fn sparse_network_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut slowest = Duration::ZERO;
    for _ in 0..20 {
        let x = random_network(&mut rng, 48, 99);
        let start = Instant::now();
        let stats = network_statistics(&x, 0.0).unwrap();
        slowest = slowest.max(start.elapsed());
        ensure!(stats.links == 99, "links {}", stats.links);
        ensure!(
            (stats.density_pct - 4.388).abs() <= 1e-3,
            "density {:.6}",
            stats.density_pct
        );
        ensure!(
            (stats.avg_degree - 2.063).abs() <= 1e-3,
            "avg degree {:.6}",
            stats.avg_degree
        );
    }
    ensure!(
        slowest < Duration::from_millis(1),
        "slowest call {slowest:?}"
    );
    Outcome::Pass(format!("20 networks, slowest {slowest:?}"))
}

fn complete_network_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_network(&mut rng, 48, 48 * 47);
    let start = Instant::now();
    let stats = network_statistics(&x, 0.0).unwrap();
    let elapsed = start.elapsed();
    ensure!(stats.links == 2256, "links {}", stats.links);
    ensure!(
        (stats.density_pct - 100.0).abs() <= 1e-9,
        "density {}",
        stats.density_pct
    );
    ensure!(
        (stats.avg_degree - 47.0).abs() <= 1e-9,
        "avg degree {}",
        stats.avg_degree
    );
    ensure!(
        (stats.clustering_pct - 100.0).abs() <= 1e-9,
        "clustering {}",
        stats.clustering_pct
    );
    ensure!(
        stats.assortativity.is_none(),
        "assortativity {:?}",
        stats.assortativity
    );
    ensure!(elapsed < Duration::from_millis(10), "took {elapsed:?}");
    Outcome::Pass(format!("took {elapsed:?}"))
}

/// Plain iterative proportional fitting of `a_i l_j` with a zero diagonal,
/// written with explicit scaling vectors rather than in-place matrix updates.
fn ipf_oracle(a: &[f64], l: &[f64]) -> Vec<Vec<f64>> {
    let n = a.len();
    let total: f64 = a.iter().sum();
    // a bank holding the whole system on one side or the other forces every
    // link away from it to be zero
    let tight: Vec<usize> = (0..n)
        .filter(|&t| a[t] + l[t] >= total * (1.0 - 1e-12))
        .collect();
    let q = |i: usize, j: usize| {
        if i == j || tight.iter().any(|&t| i != t && j != t) {
            0.0
        } else {
            a[i] * l[j]
        }
    };
    let mut r = vec![1.0; n];
    let mut s = vec![1.0; n];
    for _ in 0..200_000 {
        for i in 0..n {
            let denom: f64 = (0..n).map(|j| q(i, j) * s[j]).sum();
            r[i] = if denom > 0.0 { a[i] / denom } else { 0.0 };
        }
        for j in 0..n {
            let denom: f64 = (0..n).map(|i| r[i] * q(i, j)).sum();
            s[j] = if denom > 0.0 { l[j] / denom } else { 0.0 };
        }
        let worst = (0..n)
            .map(|i| {
                let row: f64 = (0..n).map(|j| r[i] * q(i, j) * s[j]).sum();
                if a[i] > 0.0 {
                    (row - a[i]).abs() / a[i]
                } else {
                    row
                }
            })
            .fold(0.0, f64::max);
        if worst < 1e-14 {
            break;
        }
    }
    (0..n)
        .map(|i| (0..n).map(|j| r[i] * q(i, j) * s[j]).collect())
        .collect()
}

fn maxe_against_ipf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = Vec::new();
    for _ in 0..200 {
        let n = rng.random_range(3..=20);
        let x = DMatrix::from_fn(n, n, |i, j| {
            if i == j || rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(1.0..100.0)
            }
        });
        let a: Vec<f64> = x.row_iter().map(|r| r.sum()).collect();
        let l: Vec<f64> = x.column_iter().map(|c| c.sum()).collect();
        cases.push(Marginals::new(a, l).unwrap());
    }
    let start = Instant::now();
    let outputs: Vec<ExposureMatrix> = cases
        .iter()
        .map(|m| reconstruct_maxe(m, MAXE_TOL, MAXE_MAX_ITER).unwrap())
        .collect();
    let elapsed = start.elapsed();
    for (k, (m, x)) in cases.iter().zip(&outputs).enumerate() {
        let report = validate_marginals(x, m, 1e-8);
        ensure!(
            report.pass,
            "case {k}: marginal residual {}",
            report.max_residual
        );
        let oracle = ipf_oracle(m.assets(), m.liabilities());
        let n = m.n();
        for i in 0..n {
            for j in 0..n {
                let got = x.matrix()[(i, j)];
                let want = oracle[i][j];
                ensure!(
                    (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                    "case {k} ({i},{j}): {got} vs oracle {want}"
                );
            }
        }
    }
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Outcome::Pass(format!("200 instances in {elapsed:?}"))
}

/// Smallest number of off-diagonal links able to carry the marginals: a
/// support works iff every set of lenders is owed no more than its
/// neighbours borrow in total.
fn exhaustive_min_links(a: &[u32], l: &[u32]) -> usize {
    let n = a.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << edges.len()) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let mut neighbours = vec![0u32; n];
        for (e, &(i, j)) in edges.iter().enumerate() {
            if mask & (1 << e) != 0 {
                neighbours[i] |= 1 << j;
            }
        }
        let feasible = (1u32..(1 << n)).all(|lenders| {
            let supply: u32 = (0..n)
                .filter(|i| lenders & (1 << i) != 0)
                .map(|i| a[i])
                .sum();
            let reach = (0..n)
                .filter(|i| lenders & (1 << i) != 0)
                .fold(0u32, |acc, i| acc | neighbours[i]);
            let demand: u32 = (0..n).filter(|j| reach & (1 << j) != 0).map(|j| l[j]).sum();
            supply <= demand
        });
        if feasible {
            best = size;
        }
    }
    best
}

fn integer_vectors(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn anan_minimality() -> Outcome {
    let start = Instant::now();
    let worked = Marginals::new(vec![3.0, 2.0, 0.0], vec![0.0, 2.0, 3.0]).unwrap();
    let x = reconstruct_anan(&worked).unwrap();
    ensure!(
        x.links(0.0) == 3,
        "worked example gave {} links",
        x.links(0.0)
    );

    let mut instances = 0;
    let mut exact = 0;
    for n in 2..=4 {
        let vectors = integer_vectors(n, 3);
        for a in &vectors {
            for l in &vectors {
                let total: u32 = a.iter().sum();
                if total == 0 || total != l.iter().sum::<u32>() {
                    continue;
                }
                let m = Marginals::new(
                    a.iter().map(|&v| v as f64).collect(),
                    l.iter().map(|&v| v as f64).collect(),
                )
                .unwrap();
                if m.check_hollow_feasible().is_err() {
                    continue;
                }
                instances += 1;
                let x = match reconstruct_anan(&m) {
                    Ok(x) => x,
                    Err(e) => return Outcome::Fail(format!("a={a:?} l={l:?}: {e}")),
                };
                let report = validate_marginals(&x, &m, 1e-9);
                ensure!(
                    report.pass,
                    "a={a:?} l={l:?}: residual {}",
                    report.max_residual
                );
                let greedy = x.links(0.0);
                let minimum = exhaustive_min_links(a, l);
                ensure!(
                    greedy <= minimum + 1,
                    "a={a:?} l={l:?}: {greedy} links, minimum {minimum}"
                );
                if greedy == minimum {
                    exact += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Outcome::Pass(format!(
        "{instances} instances, {exact} at the minimum, {elapsed:?}"
    ))
}

struct SmallSystem {
    c: DMatrix<f64>,
    l_ext: Vec<f64>,
    port: PortfolioMatrix,
}

fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SmallSystem {
    let c = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            rng.random_range(0.0..0.6 / n as f64)
        }
    });
    let l_ext = (0..n).map(|_| rng.random_range(0.0..0.3)).collect();
    let d = DMatrix::from_fn(n, m, |_, _| rng.random_range(0.0..10.0));
    let p = DVector::from_fn(m, |_, _| rng.random_range(0.5..1.5));
    SmallSystem {
        c,
        l_ext,
        port: PortfolioMatrix::new(d, p).unwrap(),
    }
}

/// Fixed points of `Z -> {k : v_k(Z) < v̄_k}` over all subsets of three banks,
/// with `A` computed from an explicit inverse.
fn least_fixed_point(
    c: &DMatrix<f64>,
    l_ext: &[f64],
    shocked_external: &DVector<f64>,
    thresholds: &[f64],
    beta: f64,
) -> Option<BTreeSet<usize>> {
    let n = c.nrows();
    let inverse = (DMatrix::identity(n, n) - c).try_inverse()?;
    let a = DMatrix::from_fn(n, n, |i, j| {
        let chat = 1.0 - l_ext[i] - c.column(i).sum();
        chat * inverse[(i, j)]
    });
    let mut fixed = Vec::new();
    for mask in 0u32..(1 << n) {
        let z: BTreeSet<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        let b = DVector::from_fn(n, |i, _| {
            if z.contains(&i) {
                beta * thresholds[i]
            } else {
                0.0
            }
        });
        let v = &a * (shocked_external - b);
        let failing: BTreeSet<usize> = (0..n).filter(|&k| v[k] < thresholds[k]).collect();
        if failing == z {
            fixed.push(z);
        }
    }
    let least = fixed.iter().min_by_key(|z| z.len())?.clone();
    fixed.iter().all(|z| least.is_subset(z)).then_some(least)
}

fn cascade_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    let mut multi_round = 0;
    let mut elapsed = Duration::ZERO;
    while cases < 1000 {
        let sys = random_system(&mut rng, 3, 4);
        let fm = FractionMatrix::new(sys.c.clone()).unwrap();
        let chat = capital_ratios(&fm, &sys.l_ext).unwrap();
        let a = interdependency(&fm, &chat).unwrap();
        let v0: Vec<f64> = equity_values(&a, &sys.port, &[0.0; 3])
            .unwrap()
            .iter()
            .copied()
            .collect();
        if v0.iter().any(|v| *v <= 0.0) {
            continue;
        }
        cases += 1;
        let theta = rng.random_range(0.8..=1.0);
        let beta = rng.random_range(0.0..=1.0);
        let factors: Vec<f64> = (0..4).map(|_| rng.random_range(0.7..=1.0)).collect();
        let shock = ShockScenario::new("random", factors.clone()).unwrap();
        let params = FailureParams::new(theta, beta, v0.clone()).unwrap();

        let start = Instant::now();
        let result = run_cascade(&a, &sys.port, &shock, &params).unwrap();
        elapsed += start.elapsed();

        let shocked =
            sys.port.holdings() * sys.port.prices().component_mul(&DVector::from_vec(factors));
        let thresholds: Vec<f64> = v0.iter().map(|v| theta * v).collect();
        let Some(oracle) = least_fixed_point(&sys.c, &sys.l_ext, &shocked, &thresholds, beta)
        else {
            return Outcome::Fail(format!("case {cases}: no least fixed point"));
        };
        let got: BTreeSet<usize> = result.final_failures().iter().copied().collect();
        ensure!(
            got == oracle,
            "case {cases}: cascade {got:?}, oracle {oracle:?}"
        );
        if result.hierarchy().len() > 1 {
            multi_round += 1;
        }
    }
    ensure!(elapsed < Duration::from_secs(2), "took {elapsed:?}");
    Outcome::Pass(format!(
        "{cases} instances ({multi_round} with contagion) in {elapsed:?}"
    ))
}

fn model_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_equity = 0.0_f64;
    let mut worst_sum = 0.0_f64;
    for k in 0..100 {
        let sys = random_system(&mut rng, 6, 5);
        let fm = FractionMatrix::new(sys.c.clone()).unwrap();
        let chat = capital_ratios(&fm, &sys.l_ext).unwrap();
        let a = interdependency(&fm, &chat).unwrap();
        let via_a = equity_values(&a, &sys.port, &[0.0; 6]).unwrap();
        let direct = balance_sheet_equity(&fm, &sys.l_ext, &sys.port).unwrap();
        let gap = (via_a - direct).amax();
        worst_equity = worst_equity.max(gap);
        ensure!(gap <= 1e-10, "instance {k}: equity gap {gap:e}");

        let chat0 = capital_ratios(&fm, &[0.0; 6]).unwrap();
        let a0 = interdependency(&fm, &chat0).unwrap();
        let v = equity_values(&a0, &sys.port, &[0.0; 6]).unwrap();
        let gap = (v.sum() - sys.port.external_values().sum()).abs();
        worst_sum = worst_sum.max(gap);
        ensure!(gap <= 1e-10, "instance {k}: conservation gap {gap:e}");
    }
    Outcome::Pass(format!(
        "100 instances, max equity gap {worst_equity:.1e}, max conservation gap {worst_sum:.1e}"
    ))
}

fn run_fixture(out: &Path, ensemble: usize) -> StressReport {
    let mut config = RunConfig::new(data_dir().join("roster48_synthetic.csv"), out);
    config.scenario_path = Some(data_dir().join("adverse_synthetic.csv"));
    config.hala_ensemble = ensemble;
    run_pipeline(&config).expect("fixture run")
}

fn check_structure(report: &StressReport) -> Result<usize, String> {
    let n = report.roster.len();
    for c in &report.cascades {
        let tag = format!(
            "{} seed {:?} theta {} beta {}",
            c.method, c.seed, c.theta, c.beta
        );
        if c.terminated_at > n + 1 {
            return Err(format!("{tag}: {} rounds", c.terminated_at));
        }
        for pair in c.rounds.windows(2) {
            let earlier: BTreeSet<_> = pair[0].iter().collect();
            let later: BTreeSet<_> = pair[1].iter().collect();
            if !earlier.is_subset(&later) {
                return Err(format!("{tag}: failure set shrank"));
            }
        }
    }
    let mut compared = 0;
    for low in report.cascades.iter().filter(|c| c.beta == 0.3) {
        let high = report
            .cascades
            .iter()
            .find(|c| {
                c.beta == 0.8
                    && c.method == low.method
                    && c.seed == low.seed
                    && c.theta == low.theta
            })
            .ok_or("missing beta = 0.8 run")?;
        let low_set: BTreeSet<_> = low.final_failures.iter().collect();
        let high_set: BTreeSet<_> = high.final_failures.iter().collect();
        if !low_set.is_subset(&high_set) {
            return Err(format!(
                "{} seed {:?} theta {}: beta 0.8 set misses banks of beta 0.3",
                low.method, low.seed, low.theta
            ));
        }
        compared += 1;
    }
    Ok(compared)
}

fn structural_invariants() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let report = run_fixture(dir.path(), 5);
    let compared = match check_structure(&report) {
        Ok(k) => k,
        Err(e) => return Outcome::Fail(e),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random_runs = 0;
    while random_runs < 500 {
        let n = rng.random_range(3..=8);
        let sys = random_system(&mut rng, n, 3);
        let fm = FractionMatrix::new(sys.c.clone()).unwrap();
        let a = interdependency(&fm, &capital_ratios(&fm, &sys.l_ext).unwrap()).unwrap();
        let v0: Vec<f64> = equity_values(&a, &sys.port, &vec![0.0; n])
            .unwrap()
            .iter()
            .copied()
            .collect();
        if v0.iter().any(|v| *v <= 0.0) {
            continue;
        }
        random_runs += 1;
        let theta = rng.random_range(0.8..=1.0);
        let shock =
            ShockScenario::new("s", (0..3).map(|_| rng.random_range(0.6..=1.0)).collect()).unwrap();
        let run = |beta: f64| {
            let params = FailureParams::new(theta, beta, v0.clone()).unwrap();
            run_cascade(&a, &sys.port, &shock, &params).unwrap()
        };
        let low = run(0.3);
        let high = run(0.8);
        for r in [&low, &high] {
            ensure!(
                r.terminated_at() <= n + 1,
                "random run: {} rounds",
                r.terminated_at()
            );
            ensure!(
                r.rounds()
                    .windows(2)
                    .all(|w| w[0].iter().all(|k| w[1].contains(k))),
                "random run: failure set shrank"
            );
        }
        ensure!(
            low.final_failures()
                .iter()
                .all(|k| high.final_failures().contains(k)),
            "random run: beta monotonicity violated"
        );
    }
    Outcome::Pass(format!(
        "{} fixture cascades, {compared} beta pairs, {random_runs} random systems",
        report.cascades.len()
    ))
}

fn hierarchy_of(
    report: &StressReport,
    method: Method,
    theta: f64,
    beta: f64,
) -> Option<&Vec<Vec<String>>> {
    report
        .cascades
        .iter()
        .find(|c| c.method == method && c.theta == theta && c.beta == beta)
        .map(|c| &c.hierarchy)
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn level(h: &[Vec<String>], k: usize) -> BTreeSet<String> {
    h.get(k)
        .map(|v| v.iter().cloned().collect())
        .unwrap_or_default()
}

fn eba_reproduction() -> Outcome {
    let (Some(banks), Some(scenario)) = (
        std::env::var_os("CONTAGION_EBA_BANKS"),
        std::env::var_os("CONTAGION_EBA_SCENARIO"),
    ) else {
        return Outcome::Skipped(
            "set CONTAGION_EBA_BANKS and CONTAGION_EBA_SCENARIO to an EBA-derived roster and scenario"
                .into(),
        );
    };
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(PathBuf::from(banks), dir.path());
    config.scenario_path = Some(PathBuf::from(scenario));
    let report = match run_pipeline(&config) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(format!("pipeline: {e}")),
    };

    let first = set(&["JYSK", "GCM", "Rabobank", "DNB", "SEB", "SHB"]);
    for method in Method::ALL {
        for beta in [0.3, 0.8] {
            let h = hierarchy_of(&report, method, 0.971, beta).unwrap();
            ensure!(
                level(h, 0) == first,
                "{method} theta 0.971 beta {beta}: first failures {:?}",
                level(h, 0)
            );
            if method == Method::Anan {
                ensure!(
                    h.len() == 1,
                    "anan theta 0.971 beta {beta}: {} levels",
                    h.len()
                );
            }
        }
    }
    let anan = hierarchy_of(&report, Method::Anan, 0.973, 0.3).unwrap();
    ensure!(
        level(anan, 1) == set(&["DZ Bank", "BayernLB", "ING"]),
        "anan theta 0.973 beta 0.3: second level {:?}",
        level(anan, 1)
    );
    ensure!(
        level(anan, 2) == set(&["LBBW", "BBVA"]),
        "anan theta 0.973 beta 0.3: third level {:?}",
        level(anan, 2)
    );
    for beta in [0.3, 0.8] {
        let hala = hierarchy_of(&report, Method::Hala, 0.973, beta).unwrap();
        let maxe = hierarchy_of(&report, Method::Maxe, 0.973, beta).unwrap();
        let as_sets = |h: &Vec<Vec<String>>| -> Vec<BTreeSet<String>> {
            (0..h.len()).map(|k| level(h, k)).collect()
        };
        ensure!(
            as_sets(hala) == as_sets(maxe),
            "theta 0.973 beta {beta}: random fill {hala:?} vs max entropy {maxe:?}"
        );
    }
    Outcome::Pass("all first-failure sets and hierarchies match".into())
}

fn determinism() -> Outcome {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run_fixture(first.path(), 3);
    run_fixture(second.path(), 3);
    let mut compared = 0;
    for name in ["report.json", "network_stats.csv", "hierarchies.csv"] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        ensure!(a == b, "{name} differs between runs");
        compared += a.len();
    }
    Outcome::Pass(format!("3 files, {compared} bytes identical"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("sparse-network statistics", sparse_network_statistics),
        ("complete-network statistics", complete_network_statistics),
        ("max-entropy fit against IPF oracle", maxe_against_ipf),
        ("minimum-density greedy near minimum", anan_minimality),
        ("cascade equals least fixed point", cascade_oracle),
        ("valuation identities", model_identities),
        ("cascade structural invariants", structural_invariants),
        ("EBA hierarchy reproduction", eba_reproduction),
        ("byte-identical reruns", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Outcome::Pass(detail) => {
                println!(
                    "criterion {}: PASS    {name}: {detail} [{elapsed:.2?}]",
                    k + 1
                )
            }
            Outcome::Skipped(reason) => println!("criterion {}: SKIPPED {name}: {reason}", k + 1),
            Outcome::Fail(reason) => {
                failed += 1;
                println!(
                    "criterion {}: FAIL    {name}: {reason} [{elapsed:.2?}]",
                    k + 1
                )
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
