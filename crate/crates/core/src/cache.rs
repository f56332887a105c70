//! On-disk cache of torsion towers, logarithm coefficients and `r_n`.
//!
//! A cache file is a header line `drinfeld-tower-cache <version>` followed by a JSON body.
//! Files written by another format version are refused.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drinfeld::{DrinfeldModule, TorsionLevel};
use crate::error::{Error, Result};
use crate::fq::FiniteField;
use crate::series::PrecSeries;
use crate::tower::FieldElement;
use crate::twisted::TwistedSeries;

pub const CACHE_MAGIC: &str = "drinfeld-tower-cache";
pub const CACHE_VERSION: u32 = 1;

/// What a cache file was built for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub p: u32,
    pub s: u32,
    pub spec: String,
    pub m0: u32,
    /// Level of the stored `r_n`.
    pub n: usize,
    pub levels: usize,
    pub prec: i64,
}

impl CacheKey {
    /// A file name determined by the key.
    pub fn file_name(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.spec.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        format!(
            "tower-p{}-s{}-m0{}-n{}-m{}-prec{}-{:016x}.cache",
            self.p, self.s, self.m0, self.n, self.levels, self.prec, h
        )
    }
}

/// `sum coeffs[i] X^(val+i) + O(X^prec)` with coefficients as residue-field codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub val: i64,
    pub prec: i64,
    pub coeffs: Vec<u32>,
}

impl SeriesRecord {
    fn of(s: &PrecSeries) -> Self {
        SeriesRecord {
            val: s.val(),
            prec: s.prec(),
            coeffs: s.raw_coeffs().to_vec(),
        }
    }

    fn series(&self, field: &std::sync::Arc<FiniteField>) -> Result<PrecSeries> {
        if self.coeffs.iter().any(|&c| c >= field.order()) {
            return Err(Error::Cache("series coefficient outside the residue field".into()));
        }
        if self.val > self.prec || self.val + self.coeffs.len() as i64 > self.prec {
            return Err(Error::Cache("series terms beyond their precision".into()));
        }
        let s = PrecSeries::from_coeffs(field, self.val, self.coeffs.clone(), self.prec);
        if SeriesRecord::of(&s) != *self {
            return Err(Error::Cache("series record is not normalized".into()));
        }
        Ok(s)
    }
}

/// One level `E^k`, adjoined by a monic Eisenstein polynomial over `E^(k-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub degree: u32,
    pub e: u32,
    pub f: u32,
    /// Different exponent over `K` in units of `v_k`.
    pub different: i64,
    /// `c_0 .. c_(d-1)` of the minimal polynomial of `v_k`, as series in `v_(k-1)`.
    pub minpoly: Vec<SeriesRecord>,
    /// `v_(k-1)` as a series in `v_k`.
    pub embedding: SeriesRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerCache {
    pub key: CacheKey,
    pub levels: Vec<LevelRecord>,
    pub log_degree: usize,
    /// Logarithm coefficients `c_0 .. c_(log_degree)` in `K`.
    pub logarithm: Vec<SeriesRecord>,
    /// `r_n` to `tau`-degree `log_degree`.
    pub r: Vec<SeriesRecord>,
}

impl TowerCache {
    /// Builds the towers `E^1..E^levels`, the logarithm and `r_n` of `module`.
    pub fn build(module: &DrinfeldModule, spec: &str, n: usize, levels: usize, log_degree: usize) -> Result<Self> {
        if module.is_twisted() {
            return Err(Error::Unsupported("only directly built modules are cached".into()));
        }
        let base = module.base();
        let mut out = Vec::with_capacity(levels);
        for k in 1..=levels {
            let lvl = module.torsion_level(k)?;
            let f = &lvl.field;
            let poly = lvl
                .minpoly
                .as_ref()
                .ok_or_else(|| Error::Unsupported("level without a minimal polynomial".into()))?;
            let d = poly.len() - 1;
            let (degree, embedding) = if d == 1 {
                // E^1 = K when q = 2: nothing was adjoined
                (1, PrecSeries::monomial(f.residue(), 1, 1, f.prec()))
            } else {
                (d as u32, f.embedding_series().unwrap().clone())
            };
            out.push(LevelRecord {
                level: k,
                degree,
                e: f.e(),
                f: f.f(),
                different: f.different_exponent(),
                minpoly: poly[..d].iter().map(|c| SeriesRecord::of(c.repr())).collect(),
                embedding: SeriesRecord::of(&embedding),
            });
        }
        let log = module.logarithm(log_degree)?;
        let r = module.compute_r(n, log_degree)?;
        let coeffs = |s: &TwistedSeries| s.coeffs().iter().map(|c| SeriesRecord::of(c.repr())).collect();
        Ok(TowerCache {
            key: CacheKey {
                p: base.p(),
                s: base.base_q().ilog(base.p() as u64),
                spec: spec.to_string(),
                m0: module.m0(),
                n,
                levels,
                prec: base.prec(),
            },
            levels: out,
            log_degree,
            logarithm: coeffs(&log),
            r: coeffs(&r),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let body = serde_json::to_string(self).expect("cache records serialize");
        format!("{CACHE_MAGIC} {CACHE_VERSION}\n{body}\n").into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::Cache("cache file is not UTF-8".into()))?;
        let (header, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::Cache("missing cache header".into()))?;
        let version = header
            .strip_prefix(CACHE_MAGIC)
            .and_then(|v| v.strip_prefix(' '))
            .ok_or_else(|| Error::Cache("not a tower cache file".into()))?;
        let version: u32 = version
            .trim()
            .parse()
            .map_err(|_| Error::Cache(format!("unreadable cache version {version:?}")))?;
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!(
                "cache format version {version} is not supported (expected {CACHE_VERSION}); rebuild the cache"
            )));
        }
        serde_json::from_str(body).map_err(|e| Error::Cache(format!("corrupt cache body: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    /// Rebuilds the module from the key and seeds its towers and logarithm from the
    /// stored series. Every stored embedding is checked against its minimal polynomial.
    pub fn restore(&self) -> Result<DrinfeldModule> {
        let k = &self.key;
        let module = DrinfeldModule::from_spec(&k.spec, k.p, k.s, k.m0, k.prec)?;
        let base = module.base().clone();
        if self.levels.len() != k.levels || self.levels.iter().enumerate().any(|(i, l)| l.level != i + 1) {
            return Err(Error::Cache("level records out of order".into()));
        }
        let mut prev = base.clone();
        let mut restored = Vec::with_capacity(self.levels.len());
        for rec in &self.levels {
            let res = prev.residue().clone();
            let c: Vec<PrecSeries> = rec.minpoly.iter().map(|s| s.series(&res)).collect::<Result<_>>()?;
            if c.len() != rec.degree as usize {
                return Err(Error::Cache(format!("level {}: minimal polynomial has the wrong degree", rec.level)));
            }
            let mut poly: Vec<FieldElement> =
                c.iter().map(|s| FieldElement::new(&prev, s.clone())).collect::<Result<_>>()?;
            poly.push(FieldElement::one(&prev));
            let field = if rec.degree == 1 {
                if !(&poly[0] + &FieldElement::uniformizer(&prev)).is_zero() {
                    return Err(Error::Cache(format!("level {}: degree-one polynomial is not X - pi", rec.level)));
                }
                prev.clone()
            } else {
                let y = rec.embedding.series(&res)?;
                check_root(&c, &y, rec.level)?;
                prev.extend_by_embedding(rec.degree, y, rec.different, Some(c))
                    .map_err(|e| Error::Cache(format!("level {}: {e}", rec.level)))?
            };
            if field.e() != rec.e || field.f() != rec.f || field.different_exponent() != rec.different {
                return Err(Error::Cache(format!("level {}: invariants disagree with the stored ones", rec.level)));
            }
            restored.push(TorsionLevel {
                field: field.clone(),
                minpoly: Some(poly),
                transport: None,
            });
            prev = field;
        }
        module.install_levels(restored)?;
        let res = base.residue().clone();
        let to_elems = |v: &[SeriesRecord]| -> Result<Vec<FieldElement>> {
            v.iter().map(|s| FieldElement::new(&base, s.series(&res)?)).collect()
        };
        if self.logarithm.len() != self.log_degree + 1 {
            return Err(Error::Cache("logarithm has the wrong number of coefficients".into()));
        }
        let log = TwistedSeries::truncated(&base, to_elems(&self.logarithm)?, self.log_degree)?;
        module.install_logarithm(log)?;
        Ok(module)
    }

    /// `r_n` as stored.
    pub fn r_series(&self, module: &DrinfeldModule) -> Result<TwistedSeries> {
        let base = module.base();
        let res = base.residue().clone();
        let coeffs = self
            .r
            .iter()
            .map(|s| FieldElement::new(base, s.series(&res)?))
            .collect::<Result<Vec<_>>>()?;
        TwistedSeries::truncated(base, coeffs, self.log_degree)
    }
}

/// `y^d + sum c_j(y) X^j` vanishes to the precision of the stored data.
fn check_root(c: &[PrecSeries], y: &PrecSeries, level: usize) -> Result<()> {
    let res = y.field().clone();
    let d = c.len() as i64;
    let mut acc = PrecSeries::monomial(&res, 1, d, y.prec() + d);
    for (j, cj) in c.iter().enumerate() {
        let term = cj
            .compose(y)
            .map_err(|e| Error::Cache(format!("level {level}: {e}")))?
            .shift(j as i64);
        acc = acc.add(&term);
    }
    if !acc.is_zero() {
        return Err(Error::Cache(format!(
            "level {level}: stored embedding is not a root of the stored polynomial"
        )));
    }
    Ok(())
}

/// Default cache path for a key under `dir`.
pub fn cache_path(dir: &Path, key: &CacheKey) -> std::path::PathBuf {
    dir.join(key.file_name())
}
