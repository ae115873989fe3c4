//! Factorial simulation grid: replications, aggregation and the summary
//! statistics reported for the loss difference `ΔL = L_MS - L_MA`.

use causal_averaging_core::decide::{estimate_effect, evaluate_decisions};
use causal_averaging_core::discovery::{bootstrap_posterior, Method};
use causal_averaging_core::numkit::ols_fit;
use causal_averaging_core::stats::{mean, sample_sd, two_sided_p_value};
use causal_averaging_core::synth::{
    draw_structure, generate_sample, true_marginal_effect, CausalStructure, DgpKind, DgpSpec,
    EffectSize,
};
use causal_averaging_core::Error as CoreError;
use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimulationConfig;
use crate::error::{Result, RunnerError};

/// One point of the factorial design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub dgp: DgpKind,
    pub effect: EffectSize,
    pub lambda: f64,
    pub method: Method,
}

impl Cell {
    /// Stable textual key used for seeding.
    pub fn canonical(&self) -> String {
        format!(
            "n={};dgp={};effect={};lambda={};method={}",
            self.n,
            self.dgp.as_str(),
            self.effect.as_str(),
            self.lambda,
            self.method.as_str()
        )
    }
}

/// Cells in canonical order: sample size, then DGP, effect size, λ and
/// method, each in config order.
pub fn cells(config: &SimulationConfig) -> Vec<Cell> {
    let mut out = Vec::with_capacity(config.cell_count());
    for &n in &config.sample_sizes {
        for &dgp in &config.dgp_kinds {
            for &effect in &config.effect_sizes {
                for &lambda in &config.lambdas {
                    for &method in &config.methods {
                        out.push(Cell {
                            n,
                            dgp,
                            effect,
                            lambda,
                            method,
                        });
                    }
                }
            }
        }
    }
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over `(master_seed, canonical cell, rep)` followed by a
/// splitmix64 finaliser.
pub fn run_seed(master_seed: u64, cell: &Cell, rep: usize) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let bytes = master_seed
        .to_le_bytes()
        .into_iter()
        .chain(cell.canonical().into_bytes())
        .chain((rep as u64).to_le_bytes());
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    splitmix64(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOutcome {
    pub p_forward: f64,
    pub loss_ms: f64,
    pub loss_ma: f64,
    pub delta_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    /// Carries the error tag of the failing step.
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            RunStatus::Ok => "ok".into(),
            RunStatus::Failed(tag) => format!("failed:{tag}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(RunStatus::Ok),
            _ => s
                .strip_prefix("failed:")
                .map(|t| RunStatus::Failed(t.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub cell: Cell,
    pub rep: usize,
    pub truth: CausalStructure,
    /// Present exactly when `status` is `Ok`.
    pub outcome: Option<RunOutcome>,
    pub seed: u64,
    pub status: RunStatus,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    pub fn delta_l(&self) -> Option<f64> {
        self.outcome.map(|o| o.delta_l)
    }
}

fn replicate(
    cell: &Cell,
    seed: u64,
    m: usize,
) -> (CausalStructure, std::result::Result<RunOutcome, CoreError>) {
    let spec = DgpSpec::new(cell.dgp, cell.effect);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = draw_structure(&mut rng);
    let result = (|| {
        let sample = generate_sample(&spec, truth, cell.n, &mut rng)?;
        let posterior = bootstrap_posterior(&sample, cell.method, m, splitmix64(seed))?;
        let effect_hat = estimate_effect(&sample, cell.dgp)?;
        let true_effect = true_marginal_effect(&spec, truth);
        let d = evaluate_decisions(
            &sample,
            posterior.p_forward,
            &effect_hat,
            &true_effect,
            truth,
            cell.lambda,
        );
        if !(d.loss_ms.is_finite() && d.loss_ma.is_finite()) {
            return Err(CoreError::DegenerateInput("non-finite loss"));
        }
        Ok(RunOutcome {
            p_forward: posterior.p_forward,
            loss_ms: d.loss_ms,
            loss_ma: d.loss_ma,
            delta_l: d.delta_l,
        })
    })();
    (truth, result)
}

/// One replication: draw the structure, generate data, estimate the
/// posterior and the effect under `x -> y`, and score both rules against
/// the truth. Failures become tagged records.
pub fn run_replication(cell: &Cell, rep: usize, config: &SimulationConfig) -> RunRecord {
    let seed = run_seed(config.master_seed, cell, rep);
    let (truth, result) = replicate(cell, seed, config.bootstrap_m);
    let (outcome, status) = match result {
        Ok(o) => (Some(o), RunStatus::Ok),
        Err(e) => (None, RunStatus::Failed(e.tag().to_string())),
    };
    RunRecord {
        cell: *cell,
        rep,
        truth,
        outcome,
        seed,
        status,
    }
}

/// All cells times all reps, in canonical order whatever the thread count.
pub fn run_grid(config: &SimulationConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let jobs: Vec<(Cell, usize)> = cells(config)
        .into_iter()
        .flat_map(|c| (0..config.reps).map(move |r| (c, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| RunnerError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(cell, rep)| run_replication(cell, *rep, config))
            .collect()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    N,
    Dgp,
    Effect,
    Lambda,
    Method,
}

impl Factor {
    pub const ALL: [Factor; 5] = [
        Factor::N,
        Factor::Dgp,
        Factor::Effect,
        Factor::Lambda,
        Factor::Method,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::N => "n",
            Factor::Dgp => "dgp",
            Factor::Effect => "effect",
            Factor::Lambda => "lambda",
            Factor::Method => "method",
        }
    }

    pub fn value(self, cell: &Cell) -> String {
        match self {
            Factor::N => cell.n.to_string(),
            Factor::Dgp => cell.dgp.as_str().into(),
            Factor::Effect => cell.effect.as_str().into(),
            Factor::Lambda => cell.lambda.to_string(),
            Factor::Method => cell.method.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub keys: Vec<(Factor, String)>,
    pub n_runs: usize,
    pub mean_delta: f64,
    /// Missing for single-run groups.
    pub sd_delta: Option<f64>,
    pub se_delta: Option<f64>,
}

impl CellSummary {
    pub fn from_deltas(keys: Vec<(Factor, String)>, deltas: &[f64]) -> Self {
        let sd = sample_sd(deltas);
        CellSummary {
            keys,
            n_runs: deltas.len(),
            mean_delta: mean(deltas),
            sd_delta: sd,
            se_delta: sd.map(|s| s / (deltas.len() as f64).sqrt()),
        }
    }

    pub fn key(&self, factor: Factor) -> Option<&str> {
        self.keys
            .iter()
            .find(|(f, _)| *f == factor)
            .map(|(_, v)| v.as_str())
    }
}

/// Mean, SD and SE of ΔL per group of successful runs, groups in order of
/// first appearance.
pub fn aggregate(records: &[RunRecord], group_by: &[Factor]) -> Result<Vec<CellSummary>> {
    let mut groups: IndexMap<Vec<String>, Vec<f64>> = IndexMap::new();
    for r in records {
        if let Some(d) = r.delta_l() {
            let key = group_by.iter().map(|f| f.value(&r.cell)).collect();
            groups.entry(key).or_default().push(d);
        }
    }
    if groups.is_empty() {
        return Err(CoreError::InvalidArgument("no successful runs to aggregate").into());
    }
    Ok(groups
        .into_iter()
        .map(|(key, deltas)| {
            let keys = group_by.iter().copied().zip(key).collect();
            CellSummary::from_deltas(keys, &deltas)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub t: f64,
    pub df: usize,
    pub p: f64,
}

/// Two-sided one-sample t-test of `H0: mean = 0`.
pub fn t_test_one_sample(deltas: &[f64]) -> Result<TTest> {
    if deltas.len() < 2 {
        return Err(CoreError::InvalidArgument("t-test needs at least two values").into());
    }
    let sd = sample_sd(deltas).unwrap_or(0.0);
    if !(sd > 0.0) {
        return Err(CoreError::DegenerateInput("t-test on zero-variance data").into());
    }
    let n = deltas.len();
    let m = mean(deltas);
    let t = m / (sd / (n as f64).sqrt());
    let df = n - 1;
    Ok(TTest {
        n,
        mean: m,
        sd,
        t,
        df,
        p: two_sided_p_value(t, df as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trend {
    pub n_records: usize,
    pub intercept: f64,
    pub slope: f64,
    pub se: f64,
    pub t: f64,
    pub df: usize,
    pub p: f64,
}

/// OLS of ΔL on sample size across successful runs.
pub fn ols_trend(records: &[RunRecord]) -> Result<Trend> {
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| r.delta_l().map(|d| (r.cell.n as f64, d)))
        .unzip();
    let mut distinct = x.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(
            CoreError::SingularDesign("trend needs at least three distinct sample sizes").into(),
        );
    }
    let fit = ols_fit(&x, &y)?;
    let k = x.len();
    let df = k - 2;
    let mx = mean(&x);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
    let se = (rss / df as f64 / sxx).sqrt();
    let (t, p) = if se > 0.0 {
        let t = fit.slope / se;
        (t, two_sided_p_value(t, df as f64))
    } else if fit.slope == 0.0 {
        (0.0, 1.0)
    } else {
        (fit.slope.signum() * f64::INFINITY, 0.0)
    };
    Ok(Trend {
        n_records: k,
        intercept: fit.intercept,
        slope: fit.slope,
        se,
        t,
        df,
        p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityCell {
    pub effect: String,
    pub lambda: f64,
    pub method: String,
    pub n_runs: usize,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityMethod {
    pub method: String,
    pub mean_large: f64,
    pub mean_small: f64,
    /// `ΔL(large) >= ΔL(small)`.
    pub effect_ordering_holds: bool,
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub mean_lambda_low: f64,
    pub mean_lambda_high: f64,
    /// `ΔL(lowest λ) >= ΔL(highest λ)`.
    pub lambda_ordering_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub cells: Vec<SensitivityCell>,
    pub methods: Vec<SensitivityMethod>,
    /// One entry per violated ordering.
    pub flags: Vec<String>,
}

/// Qualitative sensitivity check: ΔL should grow with the effect size and
/// shrink with the cost of intervention.
pub fn sensitivity_report(records: &[RunRecord]) -> Result<SensitivityReport> {
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let has = |e: EffectSize| ok.iter().any(|r| r.cell.effect == e);
    let mut lambdas: Vec<f64> = ok.iter().map(|r| r.cell.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    if !has(EffectSize::Large) || !has(EffectSize::Small) || lambdas.len() < 2 {
        return Err(CoreError::InvalidArgument(
            "records must cover both effect sizes and two lambdas",
        )
        .into());
    }
    let (lo, hi) = (lambdas[0], lambdas[lambdas.len() - 1]);
    let cells = aggregate(records, &[Factor::Effect, Factor::Lambda, Factor::Method])?
        .into_iter()
        .map(|s| SensitivityCell {
            effect: s.key(Factor::Effect).unwrap_or_default().to_string(),
            lambda: s
                .key(Factor::Lambda)
                .and_then(|v| v.parse().ok())
                .unwrap_or(f64::NAN),
            method: s.key(Factor::Method).unwrap_or_default().to_string(),
            n_runs: s.n_runs,
            mean_delta: s.mean_delta,
        })
        .collect();

    let mut methods = Vec::new();
    let mut flags = Vec::new();
    let mut seen: Vec<Method> = Vec::new();
    for r in &ok {
        if !seen.contains(&r.cell.method) {
            seen.push(r.cell.method);
        }
    }
    for method in seen {
        let mean_where = |pred: &dyn Fn(&Cell) -> bool| {
            let v: Vec<f64> = ok
                .iter()
                .filter(|r| r.cell.method == method && pred(&r.cell))
                .filter_map(|r| r.delta_l())
                .collect();
            if v.is_empty() {
                f64::NAN
            } else {
                mean(&v)
            }
        };
        let mean_large = mean_where(&|c| c.effect == EffectSize::Large);
        let mean_small = mean_where(&|c| c.effect == EffectSize::Small);
        let mean_lo = mean_where(&|c| c.lambda == lo);
        let mean_hi = mean_where(&|c| c.lambda == hi);
        let effect_ok = mean_large >= mean_small;
        let lambda_ok = mean_lo >= mean_hi;
        if !effect_ok {
            flags.push(format!(
                "{}: mean ΔL for large effects below small",
                method.as_str()
            ));
        }
        if !lambda_ok {
            flags.push(format!(
                "{}: mean ΔL at λ={lo} below λ={hi}",
                method.as_str()
            ));
        }
        methods.push(SensitivityMethod {
            method: method.as_str().into(),
            mean_large,
            mean_small,
            effect_ordering_holds: effect_ok,
            lambda_low: lo,
            lambda_high: hi,
            mean_lambda_low: mean_lo,
            mean_lambda_high: mean_hi,
            lambda_ordering_holds: lambda_ok,
        });
    }
    Ok(SensitivityReport {
        cells,
        methods,
        flags,
    })
}
