// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: a JSON file overlaid by command-line flags.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use cayleylab::{FieldCtx, GroupCtx};
use clap::Args;
use serde::{Deserialize, Serialize};

/// Every knob shared by the subcommands. Unset fields fall back to per-command defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// sl2, sl3, sp4, su3 or cyclic
    #[arg(long)]
    pub family: Option<String>,
    /// Field size (for su3: the size of the fixed field)
    #[arg(long)]
    pub q: Option<u64>,
    /// Field characteristic, with --k as an alternative to --q
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Order of the cyclic group
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_pairs: Option<usize>,
    /// Word length factor c0 in n = 2 floor(c0 ln|G|)
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Smallest acceptable epsilon in spectral-sweep; unset means no verdict
    #[arg(long)]
    pub min_epsilon: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub word_len: Option<usize>,
    /// Walk length cap for walk-trace
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Longest word in pingpong-cert
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Scaling parameter L of the ping-pong pair
    #[arg(long)]
    pub l: Option<i64>,
    /// Number of variables for affine zero counts
    #[arg(long)]
    pub d: Option<usize>,
    /// Polynomial corpus (JSON) for sz-audit
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Ball radius for bsg-audit
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, env = "CAYLEYLAB_THREADS")]
    pub thread_count: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    /// Loads `path` (if any) and lets the flags in `self` override it.
    pub fn resolve(self, path: Option<&PathBuf>) -> Result<Self> {
        let mut base = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        overlay!(
            base, self, family, q, p, k, n, seed, n_pairs, c0, gamma, kappa, tol, max_iter, min_epsilon, samples,
            word_len, n_max, max_len, l, d, corpus, radius, output_dir, thread_count
        );
        base.validate()?;
        Ok(base)
    }

    fn validate(&self) -> Result<()> {
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                bail!("gamma must lie in (0, 1), got {g}");
            }
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k < 1.0) {
                bail!("kappa must lie in (0, 1), got {k}");
            }
        }
        if let Some(c) = self.c0 {
            if c <= 0.0 {
                bail!("c0 must be positive, got {c}");
            }
        }
        if self.thread_count == Some(0) {
            bail!("thread count must be positive");
        }
        if self.q.is_some() && (self.p.is_some() || self.k.is_some()) {
            bail!("give either --q or --p/--k, not both");
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// `(p, k)` from `--q` or `--p/--k`.
    pub fn field_params(&self) -> Result<(u64, usize)> {
        if let Some(q) = self.q {
            return prime_power(q).with_context(|| format!("{q} is not a prime power"));
        }
        match self.p {
            Some(p) => Ok((p, self.k.unwrap_or(1))),
            None => bail!("missing field size (--q or --p)"),
        }
    }

    pub fn group(&self) -> Result<GroupCtx> {
        let family = self.family.as_deref().unwrap_or("sl2").to_ascii_lowercase();
        if family == "cyclic" {
            let n = self.n.context("cyclic groups need --n")?;
            return Ok(GroupCtx::cyclic(n)?);
        }
        let (p, k) = self.field_params()?;
        let g = match family.as_str() {
            "sl2" => GroupCtx::sl(2, FieldCtx::make(p, k, 0)?)?,
            "sl3" => GroupCtx::sl(3, FieldCtx::make(p, k, 0)?)?,
            "sp4" => GroupCtx::sp4(FieldCtx::make(p, k, 0)?)?,
            "su3" => GroupCtx::su3(FieldCtx::make(p, 2 * k, 0)?)?,
            other => bail!("unknown family {other:?} (expected sl2, sl3, sp4, su3 or cyclic)"),
        };
        Ok(g)
    }
}

/// `q = p^k` with `p` prime.
pub fn prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..).take_while(|d| d * d <= q).find(|d| q % d == 0).unwrap_or(q);
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}
