use std::io::Write;
use std::path::PathBuf;

use drinfeld_core::cache::{cache_path, CacheKey, TowerCache};
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::eval::{evaluate, R_DEGREE};
use drinfeld_core::reciprocity::{check_budget, run_suite_with, suite_plan, thresholds, working_precision};
use drinfeld_core::{Error, Result};

use crate::config::RunConfig;

pub const CACHE_ENV: &str = "DRINFELD_CACHE_DIR";

/// Default `t`-precision for `eval`.
const EVAL_PREC: i64 = 16;

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".drinfeld-cache"))
}

fn key(cfg: &RunConfig, levels: usize, prec: i64) -> CacheKey {
    CacheKey {
        p: cfg.p,
        s: cfg.s,
        spec: cfg.module.clone(),
        m0: cfg.m0,
        n: cfg.n,
        levels,
        prec,
    }
}

/// The module for `cfg` with towers up to `levels`, from the cache when a file for the
/// same key exists; otherwise built and, if `store`, written to the cache.
fn module_for(cfg: &RunConfig, levels: usize, prec: i64, store: bool) -> Result<DrinfeldModule> {
    let key = key(cfg, levels, prec);
    let path = cache_path(&cache_dir(), &key);
    if path.exists() {
        let cache = TowerCache::read(&path)?;
        if cache.key != key {
            return Err(Error::Cache(format!("{} was written for a different configuration", path.display())));
        }
        return cache.restore();
    }
    let module = DrinfeldModule::from_spec(&cfg.module, cfg.p, cfg.s, cfg.m0, prec)?;
    if store {
        TowerCache::build(&module, &cfg.module, cfg.n, levels, R_DEGREE)?.write(&path)?;
    }
    Ok(module)
}

pub fn build(cfg: &RunConfig) -> Result<bool> {
    let (levels, prec) = suite_plan(&cfg.campaign(), cfg.suite)?;
    let key = key(cfg, levels, prec);
    let module = DrinfeldModule::from_spec(&cfg.module, cfg.p, cfg.s, cfg.m0, prec)?;
    let cache = TowerCache::build(&module, &cfg.module, cfg.n, levels, R_DEGREE)?;
    let path = cache_path(&cache_dir(), &key);
    cache.write(&path)?;
    println!("module {}  q = {}  m0 = {}  t-precision {prec}", cfg.module, cfg.q(), cfg.m0);
    for rec in &cache.levels {
        let f = module.torsion_field(rec.level)?;
        println!(
            "E^{}: [E^{}:K] = {}  e = {}  f = {}  mu(different) = {}",
            rec.level,
            rec.level,
            f.degree(),
            rec.e,
            rec.f,
            f.different_valuation()
        );
    }
    let th = thresholds(&module.torsion_field(cfg.m)?, cfg.q(), cfg.m0, cfg.n);
    println!(
        "L = E^{}, n = {}: X_L1 from {}, X^(n) from {}, pairing needs mu(alpha) > {}, units need mu(1-u) > {}",
        cfg.m, cfg.n, th.x_l1, th.x_n, th.alpha, th.unit
    );
    let r = cache.r_series(&module)?;
    println!("r_{} constant term {}", cfg.n, r.coeffs()[0].format("t"));
    println!("cache {}", path.display());
    Ok(true)
}

pub fn verify(cfg: &RunConfig) -> Result<bool> {
    let campaign = cfg.campaign();
    let (levels, prec) = suite_plan(&campaign, cfg.suite)?;
    let module = module_for(cfg, levels, prec, true)?;
    let records = run_suite_with(&module, &campaign, cfg.suite)?;
    let mut report = String::new();
    for r in &records {
        report.push_str(&serde_json::to_string(r).expect("records serialize"));
        report.push('\n');
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, &report)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(report.as_bytes());
        }
    }
    let failed = records.iter().filter(|r| !r.passed()).count();
    eprintln!(
        "suite {}: {} checks, {} failed (q = {}, n = {}, m = {}, seed = {})",
        cfg.suite,
        records.len(),
        failed,
        cfg.q(),
        cfg.n,
        cfg.m,
        cfg.seed
    );
    Ok(failed == 0)
}

pub fn eval(cfg: &RunConfig, expr: &str) -> Result<bool> {
    let prec = cfg
        .prec
        .unwrap_or_else(|| working_precision(cfg.m0, cfg.n, cfg.m).max(EVAL_PREC));
    check_budget(cfg.q(), cfg.m, cfg.m0, prec)?;
    let module = module_for(cfg, cfg.m, prec, false)?;
    let value = evaluate(&module, cfg.m, cfg.n, expr)?;
    println!("{}", value.render());
    Ok(true)
}

pub fn clean() -> Result<bool> {
    let dir = cache_dir();
    let mut removed = 0;
    if let Ok(entries) = std::fs::read_dir(&dir) {
        for entry in entries.flatten() {
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with("tower-") && name.ends_with(".cache") {
                std::fs::remove_file(entry.path())
                    .map_err(|e| Error::Cache(format!("{}: {e}", entry.path().display())))?;
                removed += 1;
            }
        }
    }
    println!("removed {removed} cache files from {}", dir.display());
    Ok(true)
}
