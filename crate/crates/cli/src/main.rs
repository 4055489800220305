// SPDX-License-Identifier: Apache-2.0

//! `cayleylab`: batch experiments on random Cayley graphs of finite groups of Lie type.
//!
//! Every subcommand writes `<command>.json` (config, version, seed and results) and, where a
//! table makes sense, `<command>.csv` and `<command>.svg` under `--output-dir`.
//! Exit codes: 0 success, 1 usage or input error, 2 a checked verdict failed.

mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use cayleylab::combinat::{approx_k, ball, multiplicative_energy, tripling};
use cayleylab::nonconc::{nonconc_verdict, NonconcConfig, DEFAULT_C0, DEFAULT_GAMMA, DEFAULT_SAMPLES};
use cayleylab::pingpong::{
    build_pair, containment_check, default_samples, freeness_certificate, locally_commutative_check, pinned_pair,
    rat, verify_inclusions, Pairing,
};
use cayleylab::seeding::stream_rng;
use cayleylab::spectral::{bipartite_detect, default_max_iter, spectral_norm_meanzero, DEFAULT_TOL};
use cayleylab::sz::{fuzz_affine, group_audit, group_corpus, zero_count_affine, Corpus, SzRow};
use cayleylab::walk::phase_trace;
use cayleylab::{GroupCtx, GroupElem};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::ExperimentConfig;
use plot::{line_plot, Series};

/// `git describe` at build time, else the package version.
pub const VERSION: &str = match option_env!("CAYLEYLAB_GIT_DESCRIBE") {
    Some(v) if !v.is_empty() => v,
    _ => cayleylab::VERSION,
};

#[derive(Parser, Debug)]
#[command(name = "cayleylab", version = VERSION, about = "Expansion diagnostics for finite groups of Lie type")]
struct Cli {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Spectral norm of the averaging operator for seeded random pairs
    SpectralSweep(ExperimentConfig),
    /// L2 and sup-distance trajectory of the walk, with the three phase times
    WalkTrace(ExperimentConfig),
    /// Trap tests for seeded random pairs
    Nonconc(ExperimentConfig),
    /// Zero counts against the Schwartz-Zippel bounds
    SzAudit(ExperimentConfig),
    /// Energy, tripling and covering number of a word ball
    BsgAudit(ExperimentConfig),
    /// Exact freeness certificate for the affine ping-pong pair
    PingpongCert(ExperimentConfig),
    /// Order and basic invariants of a group
    GroupInfo(ExperimentConfig),
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    verdict_ok: bool,
    result: T,
}

struct Output {
    dir: PathBuf,
    command: &'static str,
}

impl Output {
    fn new(cfg: &ExperimentConfig, command: &'static str) -> Result<Self> {
        let dir = cfg.output_dir();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir, command })
    }

    fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.command))
    }

    fn json<T: Serialize>(&self, cfg: &ExperimentConfig, verdict_ok: bool, result: T) -> Result<PathBuf> {
        let rep = Report { command: self.command, version: VERSION, seed: cfg.seed(), config: cfg, verdict_ok, result };
        let path = self.path("json");
        std::fs::write(&path, serde_json::to_string_pretty(&rep)? + "\n")?;
        Ok(path)
    }

    fn csv<T: Serialize>(&self, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path("csv"))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn svg(&self, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> Result<()> {
        std::fs::write(self.path("svg"), line_plot(title, xlabel, ylabel, series))?;
        Ok(())
    }
}

fn generator_pairs(ctx: &GroupCtx, cfg: &ExperimentConfig) -> Vec<Vec<GroupElem>> {
    if ctx.is_cyclic() {
        return vec![vec![ctx.cyclic_elem(1)]];
    }
    (0..cfg.n_pairs.unwrap_or(5))
        .map(|i| {
            let mut rng = stream_rng(cfg.seed(), i as u64);
            vec![ctx.random_uniform(&mut rng), ctx.random_uniform(&mut rng)]
        })
        .collect()
}

#[derive(Serialize)]
struct GroupInfo {
    family: String,
    order: String,
    dim: usize,
    field_size: Option<u64>,
    twist_order: Option<u32>,
    big_cell_fraction: Option<f64>,
}

fn group_info(cfg: &ExperimentConfig) -> Result<bool> {
    let ctx = cfg.group()?;
    let out = Output::new(cfg, "group-info")?;
    let matrix = !ctx.is_cyclic();
    let info = GroupInfo {
        family: ctx.family().to_string(),
        order: ctx.order().to_string(),
        dim: ctx.dim(),
        field_size: matrix.then(|| ctx.field().size()),
        twist_order: matrix.then(|| ctx.twist_order()),
        big_cell_fraction: cayleylab::bruhat::big_cell_fraction(&ctx).ok(),
    };
    println!("{}", out.json(cfg, true, info)?.display());
    Ok(true)
}

#[derive(Serialize)]
struct SpectralRow {
    pair: usize,
    lambda_abs: f64,
    lambda_signed_max: f64,
    lambda_signed_min: f64,
    epsilon: f64,
    lambda_upper: f64,
    epsilon_lower: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    bipartite: bool,
}

fn spectral_sweep(cfg: &ExperimentConfig) -> Result<bool> {
    let ctx = cfg.group()?;
    let out = Output::new(cfg, "spectral-sweep")?;
    let order = ctx.indexed_order()?;
    let max_iter = cfg.max_iter.unwrap_or_else(|| default_max_iter(order));
    let mut rows = Vec::new();
    for (i, gens) in generator_pairs(&ctx, cfg).iter().enumerate() {
        let rep = spectral_norm_meanzero(&ctx, gens, cfg.tol.unwrap_or(DEFAULT_TOL), max_iter, cfg.seed() + i as u64)?;
        rows.push(SpectralRow {
            pair: i,
            lambda_abs: rep.lambda_abs,
            lambda_signed_max: rep.lambda_signed_max,
            lambda_signed_min: rep.lambda_signed_min,
            epsilon: rep.epsilon,
            lambda_upper: rep.lambda_upper,
            epsilon_lower: rep.epsilon_lower,
            iterations: rep.iterations,
            residual: rep.residual,
            converged: rep.converged,
            bipartite: bipartite_detect(&ctx, gens)?.is_bipartite(),
        });
    }
    let ok = cfg.min_epsilon.is_none_or(|m| rows.iter().all(|r| r.epsilon >= m && !r.bipartite));
    out.csv(&rows)?;
    out.svg(
        "spectral norm by pair",
        "pair",
        "lambda",
        &[
            Series { label: "lambda_abs", points: rows.iter().map(|r| (r.pair as f64, r.lambda_abs)).collect() },
            Series { label: "lambda_upper", points: rows.iter().map(|r| (r.pair as f64, r.lambda_upper)).collect() },
        ],
    )?;
    println!("{}", out.json(cfg, ok, &rows)?.display());
    Ok(ok)
}

fn walk_trace(cfg: &ExperimentConfig) -> Result<bool> {
    let ctx = cfg.group()?;
    let out = Output::new(cfg, "walk-trace")?;
    let gens = generator_pairs(&ctx, cfg).swap_remove(0);
    let rep = phase_trace(&ctx, &gens, cfg.kappa.unwrap_or(0.5), cfg.n_max.unwrap_or(500))?;
    out.csv(&rep.trajectory)?;
    out.svg(
        "walk trajectory",
        "n",
        "log10 value",
        &[
            Series { label: "L2 norm", points: rep.trajectory.iter().map(|r| (r.n as f64, r.l2_norm.log10())).collect() },
            Series {
                label: "sup distance",
                points: rep.trajectory.iter().map(|r| (r.n as f64, r.linf_dist.log10())).collect(),
            },
        ],
    )?;
    println!("{}", out.json(cfg, true, &rep)?.display());
    Ok(true)
}

#[derive(Serialize)]
struct NonconcRow {
    pair: usize,
    family: String,
    n: usize,
    effective: usize,
    trapped_fraction: f64,
    stderr: f64,
    threshold: f64,
    pass: bool,
}

fn nonconc(cfg: &ExperimentConfig) -> Result<bool> {
    let ctx = cfg.group()?;
    let out = Output::new(cfg, "nonconc")?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (i, gens) in generator_pairs(&ctx, cfg).iter().enumerate() {
        let b = gens.get(1).unwrap_or(&gens[0]);
        let nc = NonconcConfig {
            gamma: cfg.gamma.unwrap_or(DEFAULT_GAMMA),
            c0: cfg.c0.unwrap_or(DEFAULT_C0),
            samples: cfg.samples.unwrap_or(DEFAULT_SAMPLES),
            n: cfg.word_len,
            xn_degree: 2,
            seed: cfg.seed() + i as u64,
        };
        let reps = nonconc_verdict(&ctx, &gens[0], b, &nc)?;
        for r in &reps {
            rows.push(NonconcRow {
                pair: i,
                family: r.family.to_string(),
                n: r.n,
                effective: r.effective,
                trapped_fraction: r.trapped_fraction,
                stderr: r.stderr,
                threshold: r.threshold,
                pass: r.pass,
            });
        }
        reports.push(reps);
    }
    let ok = rows.iter().all(|r| r.pass);
    out.csv(&rows)?;
    println!("{}", out.json(cfg, ok, &reports)?.display());
    Ok(ok)
}

#[derive(Serialize)]
struct SzResult {
    affine_violations: usize,
    affine_max_count_over_bound: f64,
    group_max_constant: Option<f64>,
}

fn sz_audit(cfg: &ExperimentConfig) -> Result<bool> {
    let out = Output::new(cfg, "sz-audit")?;
    let (rows, violations, max_ratio) = match &cfg.corpus {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let (field, polys) = Corpus::from_json(&text)?;
            let d = cfg.d.context("affine corpus audits need --d")?;
            let mut rows = Vec::new();
            for (i, p) in polys.iter().enumerate() {
                let r = zero_count_affine(p, &field, d)?;
                rows.push(SzRow {
                    poly_id: i,
                    degree: r.degree,
                    q: r.q,
                    count: r.count,
                    bound: r.bound as f64,
                    ratio: (r.bound > 0).then(|| r.count as f64 / r.bound as f64),
                });
            }
            let max = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
            (rows, 0, max)
        }
        None => {
            let s = fuzz_affine(cfg.samples.unwrap_or(1000), cfg.seed())?;
            (s.rows, s.violations, s.max_ratio)
        }
    };
    let group_max = match cfg.family {
        Some(_) => {
            let ctx = cfg.group()?;
            let corpus = group_corpus(ctx.field(), ctx.dim(), 12, 3, cfg.seed());
            let g = group_audit(&ctx, &corpus)?;
            Some(g.iter().filter_map(|r| r.ratio).fold(0.0, f64::max))
        }
        None => None,
    };
    out.csv(&rows)?;
    let ok = violations == 0;
    let res = SzResult { affine_violations: violations, affine_max_count_over_bound: max_ratio, group_max_constant: group_max };
    println!("{}", out.json(cfg, ok, res)?.display());
    Ok(ok)
}

#[derive(Serialize)]
struct BsgRow {
    radius: usize,
    size: usize,
    size_aa: usize,
    size_aaa: usize,
    tripling: f64,
    energy: Option<String>,
    energy_lower: f64,
    translates: usize,
}

fn bsg_audit(cfg: &ExperimentConfig) -> Result<bool> {
    let ctx = cfg.group()?;
    let out = Output::new(cfg, "bsg-audit")?;
    let gens = generator_pairs(&ctx, cfg).swap_remove(0);
    let mut rows = Vec::new();
    let mut ok = true;
    for r in 1..=cfg.radius.unwrap_or(3) {
        let a = ball(&ctx, &gens, r)?;
        let t = tripling(&ctx, &a)?;
        let cover = approx_k(&ctx, &a)?;
        let lower = (a.len() as f64).powi(4) / t.size_aa as f64;
        let energy = multiplicative_energy(&ctx, &a).ok();
        if let Some(e) = energy {
            ok &= e as f64 >= lower * (1.0 - 1e-12);
        }
        rows.push(BsgRow {
            radius: r,
            size: a.len(),
            size_aa: t.size_aa,
            size_aaa: t.size_aaa,
            tripling: t.tripling,
            energy: energy.map(|e| e.to_string()),
            energy_lower: lower,
            translates: cover.k,
        });
    }
    out.csv(&rows)?;
    out.svg(
        "tripling of word balls",
        "radius",
        "|AAA| / |A|",
        &[Series { label: "tripling", points: rows.iter().map(|r| (r.radius as f64, r.tripling)).collect() }],
    )?;
    println!("{}", out.json(cfg, ok, &rows)?.display());
    Ok(ok)
}

#[derive(Serialize)]
struct PingPongResult {
    l: String,
    inclusions: Option<cayleylab::pingpong::InclusionReport>,
    inclusion_error: Option<String>,
    certificate: cayleylab::pingpong::FreenessReport,
    triples: cayleylab::pingpong::LocalCommutativityReport,
    containment: cayleylab::pingpong::ContainmentReport,
}

fn pingpong_cert(cfg: &ExperimentConfig) -> Result<bool> {
    let out = Output::new(cfg, "pingpong-cert")?;
    let pair = match cfg.l {
        Some(l) => build_pair(rat(l, 1), pinned_pair().h)?,
        None => pinned_pair(),
    };
    let max_len = cfg.max_len.unwrap_or(8);
    let inc = verify_inclusions(&pair, &default_samples(&pair), Pairing::Dynamic);
    let certificate = freeness_certificate(&pair, max_len)?;
    let triples = locally_commutative_check(&pair, max_len.min(8), cfg.samples.unwrap_or(1000), cfg.seed())?;
    let containment = containment_check(&pair, max_len, cfg.samples.unwrap_or(1000), cfg.seed() + 1);
    let ok = inc.is_ok() && certificate.all_nontrivial && triples.pass && containment.failures == 0;
    let res = PingPongResult {
        l: pair.l.to_string(),
        inclusion_error: inc.as_ref().err().map(|e| e.to_string()),
        inclusions: inc.ok(),
        certificate,
        triples,
        containment,
    };
    println!("{}", out.json(cfg, ok, res)?.display());
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let (name, flags) = match cli.cmd {
        Cmd::SpectralSweep(c) => ("spectral-sweep", c),
        Cmd::WalkTrace(c) => ("walk-trace", c),
        Cmd::Nonconc(c) => ("nonconc", c),
        Cmd::SzAudit(c) => ("sz-audit", c),
        Cmd::BsgAudit(c) => ("bsg-audit", c),
        Cmd::PingpongCert(c) => ("pingpong-cert", c),
        Cmd::GroupInfo(c) => ("group-info", c),
    };
    let cfg = flags.resolve(cli.config.as_ref())?;
    let work = || match name {
        "spectral-sweep" => spectral_sweep(&cfg),
        "walk-trace" => walk_trace(&cfg),
        "nonconc" => nonconc(&cfg),
        "sz-audit" => sz_audit(&cfg),
        "bsg-audit" => bsg_audit(&cfg),
        "pingpong-cert" => pingpong_cert(&cfg),
        _ => group_info(&cfg),
    };
    match cfg.thread_count {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
