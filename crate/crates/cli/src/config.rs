//! The fully resolved run configuration echoed into every output file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use euclid_core::cf::CostSpec;
use euclid_core::enumeration::{PairKind, Reference};
use euclid_core::operator::DiscParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::args::{Cli, CommandArgs, Format, GridArgs, Identity};

pub const DEFAULT_GRID: [u64; 5] = [300, 1000, 3000, 10_000, 30_000];
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// The `--cost` argument as given, or `"default"`.
    pub cost_source: String,
    pub cost: CostSpec,
    pub params: DiscParams,
    pub workers: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub log_base: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Constants,
    Moments {
        grid: Vec<u64>,
        kind: PairKind,
        p_max: u32,
    },
    Verify {
        identity: Identity,
        s: Complex64,
        omega: Complex64,
        depth: u32,
        digit_bound: u64,
        n_enum: u64,
        k_max: u32,
        p: u32,
    },
    Spectrum {
        s_re: Vec<f64>,
        s_im: Vec<f64>,
        omega: Vec<f64>,
    },
    Census {
        grid: Vec<u64>,
        kind: PairKind,
        p_max: u32,
        reference: Reference,
    },
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let common = &cli.common;
        let (cost_source, cost) = match &common.cost {
            None => ("default".to_string(), CostSpec::constant(1.0)?),
            Some(src) => (src.clone(), load_cost(src)?),
        };
        let mut params = DiscParams::default();
        if let Some(m) = common.basis_order {
            params.basis_order = m;
        }
        if let Some(n) = common.nmax {
            params.digit_truncation = n;
        }
        if let Some(r) = common.radius {
            params.sample_radius = r;
        }
        params.validate()?;
        let workers = match common.workers {
            Some(0) => bail!("--workers must be at least 1"),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let (command, default_format) = match &cli.command {
            CommandArgs::Constants => (Command::Constants, Format::Json),
            CommandArgs::Moments(m) => {
                let g = &m.grid;
                (
                    Command::Moments {
                        grid: grid_of(g),
                        kind: g.kind.into(),
                        p_max: g.pmax,
                    },
                    Format::Csv,
                )
            }
            CommandArgs::Census(c) => {
                let g = &c.grid;
                (
                    Command::Census {
                        grid: grid_of(g),
                        kind: g.kind.into(),
                        p_max: g.pmax,
                        reference: c.reference.into(),
                    },
                    Format::Csv,
                )
            }
            CommandArgs::Verify(v) => {
                let (s, omega) = match v.identity {
                    Identity::Depth => ("1.2", "0.1"),
                    _ => ("1.5", "0"),
                };
                let s = parse_complex(v.s.as_deref().unwrap_or(s))?;
                let omega = parse_complex(v.omega.as_deref().unwrap_or(omega))?;
                (
                    Command::Verify {
                        identity: v.identity,
                        s,
                        omega,
                        depth: v.depth,
                        digit_bound: v.digit_bound,
                        n_enum: v.n,
                        k_max: v.kmax,
                        p: v.p,
                    },
                    Format::Json,
                )
            }
            CommandArgs::Spectrum(sp) => (
                Command::Spectrum {
                    s_re: parse_list(&sp.s).context("--s")?,
                    s_im: parse_list(&sp.t).context("--t")?,
                    omega: parse_list(&sp.omega).context("--omega")?,
                },
                Format::Csv,
            ),
        };
        Ok(Self {
            command,
            cost_source,
            cost,
            params,
            workers,
            seed: common.seed.unwrap_or(DEFAULT_SEED),
            out: common.out.clone(),
            format: common.format.unwrap_or(default_format),
            log_base: "e".into(),
        })
    }
}

fn grid_of(g: &GridArgs) -> Vec<u64> {
    match (g.n, &g.grid) {
        (Some(n), _) => vec![n],
        (None, Some(grid)) => grid.clone(),
        (None, None) => DEFAULT_GRID.to_vec(),
    }
}

/// Inline JSON if the argument looks like an object, otherwise a file path.
pub fn load_cost(src: &str) -> Result<CostSpec> {
    let text = if src.trim_start().starts_with('{') {
        src.to_string()
    } else {
        std::fs::read_to_string(src).with_context(|| format!("reading cost file {src}"))?
    };
    serde_json::from_str(&text).context("invalid cost")
}

/// `1.5`, `-0.2i`, `1.2+0.3i`, `1-2i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().with_context(|| format!("bad number {text:?}"))?, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let split = body
        .char_indices()
        .rev()
        .find(|&(i, ch)| (ch == '+' || ch == '-') && i > 0 && !body[..i].ends_with(['e', 'E']))
        .map(|(i, _)| i);
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(Complex64::new(
        re.parse().with_context(|| format!("bad real part in {text:?}"))?,
        im.parse().with_context(|| format!("bad imaginary part in {text:?}"))?,
    ))
}

/// Comma-separated reals and `start:stop:step` ranges (inclusive of `stop`
/// up to rounding). An empty string is an empty list.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(v.parse().with_context(|| format!("bad value {v:?}"))?),
            [a, b, h] => {
                let (a, b, h): (f64, f64, f64) = (a.parse()?, b.parse()?, h.parse()?);
                if !(h > 0.0) || b < a {
                    bail!("range {item:?} needs start <= stop and a positive step");
                }
                let steps = ((b - a) / h + 1e-9).floor() as usize;
                // rounded so 0.9:2:0.1 yields 1.2 rather than 1.2000000000000002
                out.extend((0..=steps).map(|k| ((a + k as f64 * h) * 1e12).round() / 1e12));
            }
            _ => bail!("cannot parse {item:?}"),
        }
    }
    Ok(out)
}
