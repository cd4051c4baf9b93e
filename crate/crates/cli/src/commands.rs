//! One function per subcommand, each producing a [`Report`].

use std::time::Instant;

use num_rational::BigRational;
use serde_json::{json, Value};

use scl_core::characters::{hom_count, rational_to_f64, witten_zeta, CharacterTable};
use scl_core::hom_space::{build_sampler, exact_expectation, monte_carlo_expectation, sample_hom, HomSpace, Seed};
use scl_core::limits::limit_product_moment;
use scl_core::stats::ObservableSpec;
use scl_core::verify::acceptance::{run_criterion, AcceptanceConfig, CRITERIA};
use scl_core::verify::{
    run_convergence, run_cycle_convergence, run_independence, ConvergenceReport, Estimate, ExperimentPlan, Method,
};
use scl_core::{Error, Result, Word};

use crate::config::Config;
use crate::report::{prepend, Csv, Report};

fn rational(r: &BigRational) -> Value {
    json!(r.to_string())
}

fn generator_name(i: usize) -> String {
    format!("{}{}", if i % 2 == 0 { 'a' } else { 'b' }, i / 2 + 1)
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

fn spec(cfg: &Config) -> Result<ObservableSpec> {
    let text = cfg
        .spec
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("no observable spec (use --spec or a config file)".into()))?;
    ObservableSpec::parse_any(text, cfg.genus)
}

/// Adds `runtime_ms` when timings were requested; off by default so that
/// output bytes depend only on the inputs.
fn timed(mut object: Value, start: Option<Instant>) -> Value {
    if let (Some(start), Value::Object(map)) = (start, &mut object) {
        map.insert("runtime_ms".into(), json!(start.elapsed().as_millis() as u64));
    }
    object
}

pub fn characters(n: usize) -> Result<Report> {
    require_n(n)?;
    let table = CharacterTable::new(n);
    let rows: Vec<Value> = table
        .partitions()
        .iter()
        .enumerate()
        .map(|(i, lambda)| {
            let values: Vec<i128> = (0..table.len()).map(|j| table.value(i, j)).collect();
            json!({"lambda": lambda.to_string(), "dim": table.dim(i).to_string(), "values": values})
        })
        .collect();
    let classes: Vec<String> = table.partitions().iter().map(|p| p.to_string()).collect();
    let json = json!({"n": n, "classes": classes, "rows": rows});
    Ok(Report::new(json, Csv::Raw(table.to_csv())))
}

pub fn zeta(n: usize, s: u32) -> Result<Report> {
    require_n(n)?;
    let z = witten_zeta(n, s);
    Ok(Report::single(json!({
        "n": n,
        "s": s,
        "value": rational(&z),
        "decimal": rational_to_f64(&z),
    })))
}

pub fn hom_count_report(n: usize, cfg: &Config) -> Result<Report> {
    require_n(n)?;
    let count = hom_count(n, cfg.genus.get())?;
    Ok(Report::single(json!({"n": n, "g": cfg.genus.get(), "count": count.to_string()})))
}

pub fn enumerate(n: usize, cfg: &Config, start: Option<Instant>) -> Result<Report> {
    require_n(n)?;
    let spec = spec(cfg)?;
    let space = HomSpace::new(n, cfg.genus)?.with_budget(cfg.budget);
    let value = exact_expectation(&space, &spec)?;
    let json = json!({
        "n": n,
        "g": cfg.genus.get(),
        "spec": spec.to_string(),
        "method": "enumerate",
        "value": rational(&value),
        "decimal": rational_to_f64(&value),
        "seed": cfg.seed,
    });
    Ok(Report::single(timed(json, start)))
}

pub fn sample(n: usize, count: u64, cfg: &Config) -> Result<Report> {
    require_n(n)?;
    let plan = build_sampler(n, cfg.genus)?;
    let names: Vec<String> = (0..2 * cfg.genus.get() as usize).map(generator_name).collect();
    let rows = (0..count)
        .map(|i| {
            let h = sample_hom(&plan, Seed::new(cfg.seed, i));
            let mut row = serde_json::Map::new();
            row.insert("index".into(), json!(i));
            for (name, p) in names.iter().zip(h.images()) {
                row.insert(name.clone(), json!(p.to_string()));
            }
            Value::Object(row)
        })
        .collect();
    let mut empty = vec!["index"];
    empty.extend(names.iter().map(String::as_str));
    Ok(Report::rows(rows, &empty))
}

pub fn estimate(n: usize, cfg: &Config, start: Option<Instant>) -> Result<Report> {
    require_n(n)?;
    let spec = spec(cfg)?;
    let plan = build_sampler(n, cfg.genus)?;
    let (mean, stderr) = monte_carlo_expectation(&plan, &spec, cfg.samples, cfg.seed)?;
    let json = json!({
        "n": n,
        "g": cfg.genus.get(),
        "spec": spec.to_string(),
        "method": "sample",
        "mean": mean,
        "stderr": stderr,
        "samples": cfg.samples,
        "seed": cfg.seed,
    });
    Ok(Report::single(timed(json, start)))
}

pub fn predict(cfg: &Config) -> Result<Report> {
    let spec = spec(cfg)?;
    let limit = limit_product_moment(&spec);
    let warnings: Vec<String> = limit.warnings.iter().map(|w| w.to_string()).collect();
    Ok(Report::single(json!({
        "spec": limit.spec,
        "value": rational(&limit.value),
        "decimal": rational_to_f64(&limit.value),
        "warnings": warnings,
    })))
}

fn experiment(cfg: &Config, n_values: Vec<usize>, method: Method) -> Result<ExperimentPlan> {
    Ok(ExperimentPlan::new(spec(cfg)?, n_values, method, cfg.samples, cfg.seed)?.with_budget(cfg.budget))
}

/// Only sampled values are banded: exact finite-`n` values differ from the
/// limit by design.
fn band(e: &Estimate, target: &BigRational, sigmas: f64) -> Option<bool> {
    (!e.is_exact()).then(|| e.within(target, sigmas))
}

fn convergence_report(report: ConvergenceReport, sigmas: f64, gap_band: bool) -> Report {
    let zero = BigRational::from_integer(0.into());
    let mut failed = false;
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|row| {
            let pass = if gap_band {
                band(&row.gap, &zero, sigmas)
            } else {
                band(&row.joint, &report.prediction, sigmas)
            };
            failed |= pass == Some(false);
            let mut v = serde_json::to_value(row).expect("rows serialize");
            if let Value::Object(map) = &mut v {
                map.insert("pass".into(), json!(pass));
            }
            v
        })
        .collect();
    let csv_rows: Vec<Value> = rows
        .iter()
        .map(|r| prepend(prepend(r.clone(), "prediction", rational(&report.prediction)), "spec", json!(report.spec)))
        .collect();
    let warnings: Vec<String> = report.warnings.iter().map(|w| w.to_string()).collect();
    let json = json!({
        "spec": report.spec,
        "prediction": rational(&report.prediction),
        "prediction_decimal": report.prediction_decimal,
        "warnings": warnings,
        "seed": report.seed,
        "samples": report.samples,
        "sigmas": sigmas,
        "rows": rows,
    });
    let csv = crate::report::table(&["spec", "prediction", "n", "method"], &csv_rows);
    Report { json, csv, failed }
}

pub fn verify_convergence(cfg: &Config, n_values: Vec<usize>, method: Method, sigmas: f64) -> Result<Report> {
    let report = run_convergence(&experiment(cfg, n_values, method)?)?;
    Ok(convergence_report(report, sigmas, false))
}

pub fn verify_independence(cfg: &Config, n_values: Vec<usize>, method: Method, sigmas: f64) -> Result<Report> {
    let report = run_independence(&experiment(cfg, n_values, method)?)?;
    Ok(convergence_report(report, sigmas, true))
}

pub fn verify_cycles(
    cfg: &Config,
    words: &[String],
    max_d: usize,
    n_values: Vec<usize>,
    method: Method,
    sigmas: f64,
) -> Result<Report> {
    let words: Vec<Word> = words.iter().map(|w| Word::parse(w, cfg.genus)).collect::<Result<_>>()?;
    // the spec only carries the genus and the sampling settings here
    let carrier = ObservableSpec::empty(cfg.genus);
    let plan = ExperimentPlan::new(carrier, n_values, method, cfg.samples, cfg.seed)?.with_budget(cfg.budget);
    let report = run_cycle_convergence(&words, max_d, &plan)?;
    let mut failed = false;
    let mut tag = |v: Value, pass: Option<bool>, table: &str| {
        failed |= pass == Some(false);
        let mut v = prepend(v, "table", json!(table));
        if let Value::Object(map) = &mut v {
            map.insert("pass".into(), json!(pass));
        }
        v
    };
    let means: Vec<Value> = report
        .means
        .iter()
        .map(|r| tag(serde_json::to_value(r).expect("rows serialize"), band(&r.mean, &r.limit, sigmas), "mean"))
        .collect();
    let covariances: Vec<Value> = report
        .covariances
        .iter()
        .map(|r| {
            let pass = band(&r.covariance, &r.limit, sigmas);
            tag(serde_json::to_value(r).expect("rows serialize"), pass, "covariance")
        })
        .collect();
    let all: Vec<Value> = means.iter().chain(&covariances).cloned().collect();
    let csv = crate::report::table(&["table", "n"], &all);
    let json = json!({
        "seed": report.seed,
        "samples": report.samples,
        "sigmas": sigmas,
        "means": means,
        "covariances": covariances,
    });
    Ok(Report { json, csv, failed })
}

pub fn selftest(cfg: &Config, ids: &[u32]) -> Result<Report> {
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == *id)) {
        return Err(Error::InvalidArgument(format!("no criterion {bad}")));
    }
    let acceptance = AcceptanceConfig {
        samples: cfg.samples,
        seed: cfg.seed,
    };
    let mut failed = false;
    let rows: Vec<Value> = CRITERIA
        .iter()
        .filter(|(id, _)| ids.is_empty() || ids.contains(id))
        .map(|&(id, _)| {
            let r = run_criterion(id, &acceptance);
            eprintln!("{r}");
            failed |= !r.passed;
            json!({"id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail})
        })
        .collect();
    let mut report = Report::rows(rows, &["id", "name", "passed", "detail"]);
    report.failed = failed;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Format;

    fn cfg_with(spec: &str) -> Config {
        Config {
            spec: Some(spec.into()),
            ..Config::default()
        }
    }

    #[test]
    fn generator_names() {
        let names: Vec<String> = (0..4).map(generator_name).collect();
        assert_eq!(names, ["a1", "b1", "a2", "b2"]);
    }

    #[test]
    fn small_reports() {
        let r = zeta(2, 2).unwrap();
        assert_eq!(r.json["value"], "2");
        let r = hom_count_report(3, &Config::default()).unwrap();
        assert_eq!(r.json["count"], "486");
        let r = enumerate(3, &cfg_with("x=\"a1\" exps=[1]"), None).unwrap();
        assert_eq!(r.json["value"], "10/9");
        assert!(r.json.get("runtime_ms").is_none());
    }

    #[test]
    fn characters_csv_is_the_table() {
        let r = characters(3).unwrap();
        assert_eq!(r.render(Format::Csv), CharacterTable::new(3).to_csv());
        assert_eq!(r.json["rows"][0]["dim"], "1");
    }

    #[test]
    fn empty_sample_report() {
        let r = sample(3, 0, &Config::default()).unwrap();
        assert_eq!(r.render(Format::Json), "[]\n");
        assert_eq!(r.render(Format::Csv), "index,a1,b1,a2,b2\n");
    }

    #[test]
    fn exact_rows_are_not_banded() {
        let cfg = cfg_with("x=\"a1\" exps=[1]");
        let r = verify_convergence(&cfg, vec![2, 3], Method::Enumerate, 3.0).unwrap();
        assert!(!r.failed);
        assert_eq!(r.json["rows"][1]["pass"], Value::Null);
    }

    #[test]
    fn missing_spec_is_an_error() {
        assert!(predict(&Config::default()).is_err());
        assert!(selftest(&Config::default(), &[42]).is_err());
    }
}
