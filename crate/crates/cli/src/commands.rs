use std::path::Path;
use std::sync::Arc;

use cayley_roe::cohomology::{self, CochainArg, ModuleRep};
use cayley_roe::group::catalog::standard_catalog;
use cayley_roe::roe::{Block, DisjointUnionSpace};
use cayley_roe::sos::{self, SolverOptions};
use cayley_roe::spectral::{self, Method};
use cayley_roe::topology;
use cayley_roe::{Family, GroupSpec, MarkedGroup, SpectrumReport, Word};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Report};

/// Indexed group specs named by `--catalog` and selected by `--m`/`--range`.
pub fn resolve(config: &RunConfig) -> Result<Vec<(u64, GroupSpec)>, CliError> {
    let name = config
        .catalog
        .as_deref()
        .ok_or_else(|| CliError::Usage("--catalog is required".into()))?;
    let indices = config.indices()?;
    if let Some(family) = Family::parse(name) {
        let idx = indices.ok_or_else(|| CliError::Usage(format!("family '{name}' needs --m or --range")))?;
        return Ok(idx.into_iter().map(|i| (i, family.member(i))).collect());
    }
    let list: Vec<GroupSpec> = if name == "standard" {
        standard_catalog()
    } else if Path::new(name).is_file() {
        let text = std::fs::read_to_string(name)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("catalog {name}: {e}")))?;
        let value = match value {
            Value::Object(mut o) if o.contains_key("groups") => o.remove("groups").expect("checked"),
            v => v,
        };
        let parsed = match value {
            Value::Array(_) => serde_json::from_value(value),
            v => serde_json::from_value(v).map(|s| vec![s]),
        };
        parsed.map_err(|e| CliError::Usage(format!("catalog {name}: {e}")))?
    } else {
        return Err(CliError::Usage(format!("unknown catalog '{name}'")));
    };
    match indices {
        None => Ok(list.into_iter().enumerate().map(|(i, s)| (i as u64, s)).collect()),
        Some(idx) => idx
            .into_iter()
            .map(|i| {
                list.get(i as usize)
                    .cloned()
                    .map(|s| (i, s))
                    .ok_or_else(|| CliError::Usage(format!("catalog index {i} out of range (size {})", list.len())))
            })
            .collect(),
    }
}

fn method(config: &RunConfig) -> Result<Method, CliError> {
    config.method.parse().map_err(|_| CliError::Usage(format!("unknown method '{}'", config.method)))
}

fn build(spec: &GroupSpec) -> Result<Arc<MarkedGroup>, CliError> {
    Ok(Arc::new(spec.build()?))
}

fn single(config: &RunConfig) -> Result<(u64, Arc<MarkedGroup>), CliError> {
    let groups = resolve(config)?;
    match groups.as_slice() {
        [(i, spec)] => Ok((*i, build(spec)?)),
        _ => Err(CliError::Usage(format!("{} needs exactly one group, got {}", config.command, groups.len()))),
    }
}

const SPECTRUM_HEADER: [&str; 7] = ["index", "label", "order", "nu", "lambda_max", "method", "residual"];

fn spectrum_row(index: u64, r: &SpectrumReport) -> Vec<Value> {
    vec![
        json!(index),
        json!(r.label),
        json!(r.order),
        num(r.nu),
        num(r.lambda_max),
        json!(r.method.name()),
        num(r.residual),
    ]
}

fn gaps(config: &RunConfig) -> Result<(Report, Vec<SpectrumReport>), CliError> {
    let groups = resolve(config)?;
    let specs: Vec<GroupSpec> = groups.iter().map(|(_, s)| s.clone()).collect();
    let positions: Vec<u64> = (0..specs.len() as u64).collect();
    let results = spectral::family_gaps(|p| specs[p as usize].clone(), &positions, method(config)?, config.jobs);
    let mut report = Report::new(SPECTRUM_HEADER.to_vec());
    let mut reports = Vec::new();
    for ((index, _), (_, r)) in groups.iter().zip(results) {
        let r = r?;
        report.push(spectrum_row(*index, &r));
        reports.push(r);
    }
    Ok((report, reports))
}

pub fn gap(config: &RunConfig) -> Result<Report, CliError> {
    Ok(gaps(config)?.0)
}

pub fn family(config: &RunConfig) -> Result<Report, CliError> {
    let (mut report, reports) = gaps(config)?;
    match spectral::expander_verdict(&reports) {
        Ok(v) => {
            eprintln!("{} (finite-range evidence, not a proof)", v.verdict);
            report.extra.insert(
                "verdict".into(),
                json!({
                    "min_nu": num(v.min_nu),
                    "exponent": num(v.exponent),
                    "r_squared": num(v.r_squared),
                    "verdict": v.verdict,
                }),
            );
        }
        Err(e) => {
            report.extra.insert("verdict".into(), json!({ "error": e.to_string() }));
        }
    }
    Ok(report)
}

pub fn converge(config: &RunConfig) -> Result<Report, CliError> {
    let radius = config.radius.ok_or_else(|| CliError::Usage("--radius is required".into()))?;
    let groups = resolve(config)?;
    let built = groups.iter().map(|(_, s)| s.build()).collect::<cayley_roe::Result<Vec<_>>>()?;
    let rep = topology::detect_convergence(&built, radius);
    let mut report = Report::new(vec!["radius", "stabilized", "at_index", "signature_hash", "ball_size", "exterior_edges"]);
    let (size, exterior) = match topology::limit_ball(&built, radius) {
        Ok(sig) => (json!(sig.size), json!(sig.exterior_count())),
        Err(_) => (Value::Null, Value::Null),
    };
    report.push(vec![
        json!(radius),
        json!(rep.stabilized),
        rep.at_index.map_or(Value::Null, |p| json!(groups[p].0)),
        rep.signature_hash.map_or(Value::Null, Value::from),
        size,
        exterior,
    ]);
    Ok(report)
}

pub fn partition(config: &RunConfig) -> Result<Report, CliError> {
    if config.relators.is_empty() {
        return Err(CliError::Usage("--relators is required (comma-separated words, repeatable)".into()));
    }
    let sets = config
        .relators
        .iter()
        .map(|s| s.split(',').filter(|w| !w.trim().is_empty()).map(|w| Word::parse(w.trim())).collect())
        .collect::<cayley_roe::Result<Vec<Vec<Word>>>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let groups = resolve(config)?;
    let built = groups.iter().map(|(_, s)| s.build()).collect::<cayley_roe::Result<Vec<_>>>()?;
    let part = topology::partition_by_quotient(&sets, &built)?;
    let names = |ps: &[usize]| ps.iter().map(|&p| groups[p].0.to_string()).collect::<Vec<_>>().join(" ");
    let mut report = Report::new(vec!["class", "relators", "indices"]);
    for (class, members) in &part.classes {
        report.push(vec![json!(class), json!(config.relators[*class]), json!(names(members))]);
    }
    report.push(vec![json!("residual"), Value::Null, json!(names(&part.residual))]);
    Ok(report)
}

pub fn sos_certify(config: &RunConfig) -> Result<Report, CliError> {
    let (index, g) = single(config)?;
    let radius = config.radius.unwrap_or_else(|| g.diameter());
    let opts = SolverOptions {
        seed: config.seed,
        ..SolverOptions::default()
    };
    let cert = sos::certified_gap(&g, radius, config.epsilon, config.tol, &opts)?;
    let exact = spectral::spectral_gap(&g, method(config)?)?;
    let mut report = Report::new(vec![
        "index",
        "label",
        "order",
        "radius",
        "epsilon",
        "nu_certified",
        "gap",
        "lambda_lo",
        "nu_exact",
        "residual_l1",
        "psd_witness",
    ]);
    let (residual, psd) = match &cert.certificate {
        Some(c) => {
            let v = sos::verify_certificate(c, &c.target)?;
            if !(v.residual_l1 < 1e-8) || !v.propagation_ok {
                return Err(CliError::Verification(format!(
                    "certificate residual {:e}, propagation ok: {}",
                    v.residual_l1, v.propagation_ok
                )));
            }
            report.extra.insert(
                "certificate".into(),
                serde_json::to_value(c.to_json()).map_err(|e| CliError::Usage(e.to_string()))?,
            );
            (num(v.residual_l1), num(v.psd_witness))
        }
        None => (Value::Null, Value::Null),
    };
    report.push(vec![
        json!(index),
        json!(g.label()),
        json!(g.order()),
        json!(radius),
        num(config.epsilon),
        num(cert.nu_certified),
        num(cert.gap),
        num(cert.lambda_lo),
        num(exact.nu),
        residual,
        psd,
    ]);
    Ok(report)
}

pub fn roe_avg(config: &RunConfig) -> Result<Report, CliError> {
    let (_, g) = single(config)?;
    let radius = config.radius.unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ball = g.ball(radius).len();
    let mut report = Report::new(vec!["sample", "inputs", "outputs", "max_propagation", "defect_l1"]);
    for s in 0..config.samples {
        let sample = sos::random_roe_sos_input(&g, radius, config.terms, &mut rng);
        let out = sos::roe_to_group_sos(&sample.inputs, &g, radius)?;
        let defect = sos::reassembly_defect(&out, &sample.target)?;
        let prop = out.iter().map(|x| x.propagation()).max().unwrap_or(0);
        if out.len() != config.terms * ball || prop > radius || !(defect <= 1e-9) {
            return Err(CliError::Verification(format!(
                "sample {s}: {} outputs, propagation {prop}, defect {defect:e}",
                out.len()
            )));
        }
        report.push(vec![json!(s), json!(config.terms), json!(out.len()), json!(prop), num(defect)]);
    }
    Ok(report)
}

/// Block-size partitions of `n` in non-increasing order.
fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn cohomology(config: &RunConfig) -> Result<Report, CliError> {
    let sizes = config.indices()?.unwrap_or_else(|| (1..=4).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = Report::new(vec![
        "points",
        "blocks",
        "module_dim",
        "dim_l",
        "cochains",
        "cocycles",
        "coboundaries",
        "h1",
        "dd_max",
    ]);
    for n in sizes {
        for blocks in partitions(n as usize, n as usize) {
            let space = DisjointUnionSpace::plain(blocks.iter().map(|&b| Block::path(b)).collect());
            let module = ModuleRep::natural(&space).random_conjugate(&mut rng);
            let h = cohomology::h1_dim(&space, &module, config.cap)?;
            let v = random_vector(module.dim(), &mut rng);
            let th = cohomology::differential(1, &space, &module, CochainArg::Vector(&v))?;
            let dd = cohomology::differential(2, &space, &module, CochainArg::Map(&th))?.matrix.amax();
            if !(dd < 1e-12) {
                return Err(CliError::Verification(format!("d2 d1 = {dd:e} on blocks {blocks:?}")));
            }
            let label = blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("+");
            report.push(vec![
                json!(n),
                json!(label),
                json!(h.dim_module),
                json!(h.dim_l),
                json!(h.dim_cochains),
                json!(h.cocycles),
                json!(h.coboundaries),
                json!(h.h1),
                num(dd),
            ]);
        }
    }
    Ok(report)
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn union(config: &RunConfig) -> Result<Report, CliError> {
    let groups = resolve(config)?;
    let built = groups.iter().map(|(_, s)| build(s)).collect::<Result<Vec<_>, _>>()?;
    let nu = spectral::union_gap(&built)?;
    let mut report = Report::new(SPECTRUM_HEADER.to_vec());
    for ((index, _), g) in groups.iter().zip(&built) {
        report.push(spectrum_row(*index, &spectral::spectral_gap(g, method(config)?)?));
    }
    report.extra.insert("union_gap".into(), num(nu));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_of_four() {
        assert_eq!(partitions(4, 4).len(), 5);
        assert_eq!(partitions(1, 1), vec![vec![1]]);
    }
}
