use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use ucp_core::analysis::{fit_scaling, saturation_scan_stages, ScalingFit};
use ucp_core::grid::{k_grid, linspace, Scale};
use ucp_core::{max_valid_stage, transmission_oracle, transmission_ucp, ScatterResult, StageLimit, UcpError, UcpSpec};

use crate::config::{parse_list, parse_range, Engine, Settings};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn required<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing --{name} (flag or config key)"))
}

fn spec_from(s: &Settings) -> Result<UcpSpec> {
    Ok(UcpSpec::new(
        required(s.length, "L")?,
        required(s.height, "V")?,
        required(s.rho, "rho")?,
        required(s.alpha, "alpha")?,
        required(s.beta, "beta")?,
        s.stage.unwrap_or(0),
    )?)
}

fn sweep(s: &Settings, kmin: f64, kmax: f64, nk: usize, scale: Scale) -> Result<Vec<f64>> {
    Ok(k_grid(
        s.kmin.unwrap_or(kmin),
        s.kmax.unwrap_or(kmax),
        s.nk.unwrap_or(nk),
        s.scale.map(Scale::from).unwrap_or(scale),
    )?)
}

/// Runs `f` over `items` on `workers` threads; results keep input order.
fn parallel_map<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn header(s: &Settings) -> Result<String> {
    let mut out = String::new();
    for (k, v) in s.key_values()? {
        if k != "workers" {
            writeln!(out, "# {k}={v}")?;
        }
    }
    Ok(out)
}

pub fn transmission(s: &Settings, workers: usize) -> Result<String> {
    let spec = spec_from(s)?;
    let ks = sweep(s, 0.1, 10.0, 200, Scale::Linear)?;
    let engine = s.engine.unwrap_or(Engine::ClosedForm);
    let rows = parallel_map(workers, &ks, |&k| -> Result<(ScatterResult, Option<ScatterResult>)> {
        Ok(match engine {
            Engine::ClosedForm => (transmission_ucp(&spec, k)?, None),
            Engine::Oracle => (transmission_oracle(&spec, k)?, None),
            Engine::Both => (transmission_ucp(&spec, k)?, Some(transmission_oracle(&spec, k)?)),
        })
    })?;
    let mut out = header(s)?;
    match engine {
        Engine::Both => out.push_str("k,T,R,log10_T,T_oracle,abs_diff\n"),
        _ => out.push_str("k,T,R,log10_T\n"),
    }
    let mut max_diff: f64 = 0.0;
    for (k, (r, oracle)) in ks.iter().zip(&rows) {
        write!(out, "{},{},{},{}", num(*k), num(r.transmission), num(r.reflection), num(r.log10_transmission))?;
        if let Some(o) = oracle {
            let diff = (r.transmission - o.transmission).abs();
            max_diff = max_diff.max(diff);
            write!(out, ",{},{}", num(o.transmission), num(diff))?;
        }
        out.push('\n');
    }
    if engine == Engine::Both {
        writeln!(out, "# max_abs_diff={}", num(max_diff))?;
    }
    Ok(out)
}

pub fn grid(s: &Settings, workers: usize) -> Result<String> {
    let axis = |range: &Option<String>, single: Option<f64>, name: &str| -> Result<Vec<f64>> {
        match (range, single) {
            (Some(text), _) => {
                let (min, max, n) = parse_range(text, name)?;
                Ok(linspace(min, max, n))
            }
            (None, Some(v)) => Ok(vec![v]),
            (None, None) => bail!("grid needs --{name}-range or --{name}"),
        }
    };
    let alphas = axis(&s.alpha_range, s.alpha, "alpha")?;
    let betas = axis(&s.beta_range, s.beta, "beta")?;
    let rhos = axis(&s.rho_range, s.rho, "rho")?;
    let ks = match &s.k_list {
        Some(text) => parse_list(text, "k")?,
        None => sweep(s, 0.5, 10.0, 20, Scale::Linear)?,
    };
    let length = required(s.length, "L")?;
    let height = required(s.height, "V")?;
    let stage = s.stage.unwrap_or(3);
    let mut points = Vec::with_capacity(alphas.len() * betas.len() * rhos.len() * ks.len());
    for &alpha in &alphas {
        for &beta in &betas {
            for &rho in &rhos {
                for &k in &ks {
                    points.push((alpha, beta, rho, k));
                }
            }
        }
    }
    let rows = parallel_map(workers, &points, |&(alpha, beta, rho, k)| -> Result<Option<f64>> {
        match UcpSpec::new(length, height, rho, alpha, beta, stage) {
            Ok(spec) => Ok(Some(transmission_ucp(&spec, k)?.transmission)),
            Err(UcpError::InvalidSpec(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    })?;
    let mut out = header(s)?;
    out.push_str("alpha,beta,rho,k,valid,T\n");
    for ((alpha, beta, rho, k), t) in points.iter().zip(&rows) {
        let (valid, t) = match t {
            Some(t) => (true, num(*t)),
            None => (false, "nan".to_string()),
        };
        writeln!(out, "{},{},{},{},{valid},{t}", num(*alpha), num(*beta), num(*rho), num(*k))?;
    }
    Ok(out)
}

pub fn geometry(s: &Settings) -> Result<String> {
    let spec = spec_from(s)?;
    let mut out = header(s)?;
    out.push_str("index,offset,width\n");
    for (i, b) in spec.build_segments().barriers.iter().enumerate() {
        writeln!(out, "{i},{},{}", num(b.offset), num(b.width))?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct ScalingReport<'a> {
    spec: &'a UcpSpec,
    v0: f64,
    constant_area_height: f64,
    fit: ScalingFit,
}

pub fn scaling(s: &Settings) -> Result<String> {
    let spec = spec_from(s)?;
    let v0 = spec.height();
    let window = (s.kmin.unwrap_or(50.0), s.kmax.unwrap_or(500.0));
    let fit = fit_scaling(&spec, v0, window, s.nk.unwrap_or(400))?;
    let report = ScalingReport {
        spec: &spec,
        v0,
        constant_area_height: ucp_core::analysis::constant_area_height(&spec, v0)?,
        fit,
    };
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

pub fn saturation(s: &Settings) -> Result<String> {
    let base = spec_from(s)?;
    let (gmin, gmax) = (s.gmin.unwrap_or(3), s.gmax.unwrap_or(9));
    if gmax <= gmin {
        bail!("--gmax must exceed --gmin");
    }
    let ks = sweep(s, 0.5, 10.0, 2000, Scale::Linear)?;
    let report = saturation_scan_stages(&base, gmin..=gmax, &ks)?;
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

#[derive(Serialize)]
struct Validation {
    valid: bool,
    /// `null` when every stage is well formed.
    max_valid_stage: Option<u32>,
    message: Option<String>,
}

/// Returns the report and whether the spec is valid.
pub fn validate(s: &Settings) -> Result<(String, bool)> {
    let alpha = required(s.alpha, "alpha")?;
    let beta = required(s.beta, "beta")?;
    let max_valid_stage = match max_valid_stage(alpha, beta) {
        StageLimit::Unbounded => None,
        StageLimit::MaxStage(n) => Some(n),
    };
    let message = match spec_from(s) {
        Ok(_) => None,
        Err(e) if e.downcast_ref::<UcpError>().is_some() => Some(e.to_string()),
        Err(e) => return Err(e),
    };
    let report = Validation { valid: message.is_none(), max_valid_stage, message };
    Ok((serde_json::to_string_pretty(&report)? + "\n", report.valid))
}
