use std::path::PathBuf;

use mirror_spectra::{Error, ModularParam, PrecCtx};
use rug::float::Constant;
use rug::Float;

pub const QUICK_BITS: u32 = 64;
pub const QUICK_TOL: f64 = 1e-10;
/// Seed of every random test point; printed in output headers.
pub const SEED: u64 = 0x05ee_df01;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("check failed: {0}")]
    Check(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Config(_) | Failure::Io { .. } => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Settings shared by every command.
#[derive(Clone, Debug)]
pub struct JobConfig {
    /// None selects π/4 at full precision.
    pub theta: Option<f64>,
    pub precision_bits: u32,
    pub tol: f64,
    pub digits: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl JobConfig {
    pub fn context(&self) -> Result<PrecCtx, Failure> {
        if self.digits == 0 {
            return Err(Failure::Config("--digits must be at least 1".into()));
        }
        PrecCtx::new(self.precision_bits, self.tol).map_err(|e| Failure::Config(e.to_string()))
    }

    /// Coupling for the spectrum commands. θ below π/8 still runs but is
    /// flagged: the series converge slowly there.
    pub fn modular(&self, ctx: &PrecCtx) -> Result<(ModularParam, bool), Failure> {
        let mp = match self.theta {
            None => ModularParam::quarter_pi(ctx),
            Some(t) => ModularParam::new(t, ctx).map_err(|e| Failure::Config(e.to_string()))?,
        };
        let supported = mp.in_supported_range();
        if !supported {
            let lo = Float::with_val(53, Constant::Pi) / 8u32;
            eprintln!(
                "warning: theta = {} is outside the supported range [{:.6}, {:.6}); results are not validated",
                mp.theta().to_f64(),
                lo.to_f64(),
                std::f64::consts::FRAC_PI_2
            );
        }
        Ok((mp, supported))
    }

    /// Digits that the tolerance actually supports.
    pub fn reliable_digits(&self) -> usize {
        (-self.tol.log10()).floor().max(1.0) as usize
    }
}
