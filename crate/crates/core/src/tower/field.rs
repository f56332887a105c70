use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::fq::{FiniteField, ResidueEmbedding};
use crate::series::PrecSeries;
use crate::valuation::RationalValuation;

use super::FieldElement;

#[derive(Debug, Clone)]
pub enum LayerKind {
    /// `F_q((t))`.
    Base { p: u32, s: u32 },
    /// Residue extension of the given degree; the uniformizer is unchanged.
    Unramified { degree: u32 },
    /// Totally ramified layer. `minpoly` holds `c_0..c_{d-1}` of the monic minimal polynomial
    /// of the new uniformizer over the layer below, when known.
    Eisenstein {
        degree: u32,
        minpoly: Option<Vec<PrecSeries>>,
    },
}

pub(crate) struct Layer {
    pub(crate) kind: LayerKind,
    pub(crate) residue: Arc<FiniteField>,
    /// Ramification index over the base.
    pub(crate) e: u32,
    /// Residue degree over the base.
    pub(crate) f: u32,
    /// Working absolute precision in this layer's uniformizer.
    pub(crate) prec: i64,
    /// Valuation of the different over the base, in this layer's uniformizer.
    pub(crate) different: i64,
    /// Uniformizer of the layer below as a series in this layer's uniformizer.
    pub(crate) lower_uniformizer: Option<PrecSeries>,
    pub(crate) residue_map: Option<ResidueEmbedding>,
    powers: Mutex<PowerCache>,
}

#[derive(Default)]
struct PowerCache {
    pos: Vec<PrecSeries>,
    neg: Vec<PrecSeries>,
}

impl Layer {
    pub(crate) fn new(
        kind: LayerKind,
        residue: Arc<FiniteField>,
        e: u32,
        f: u32,
        prec: i64,
        different: i64,
        lower_uniformizer: Option<PrecSeries>,
        residue_map: Option<ResidueEmbedding>,
    ) -> Layer {
        Layer {
            kind,
            residue,
            e,
            f,
            prec,
            different,
            lower_uniformizer,
            residue_map,
            powers: Mutex::new(PowerCache::default()),
        }
    }

    /// `y^i` where `y` is the lower uniformizer in this layer.
    pub(crate) fn lower_power(&self, i: i64) -> Result<PrecSeries> {
        let y = self
            .lower_uniformizer
            .as_ref()
            .ok_or_else(|| Error::Usage("base layer has no lower uniformizer".into()))?;
        let mut cache = self.powers.lock().unwrap();
        if i >= 0 {
            if cache.pos.is_empty() {
                cache.pos.push(PrecSeries::one(&self.residue, self.prec.max(y.prec()) * 4));
            }
            while cache.pos.len() as i64 <= i {
                let next = cache.pos.last().unwrap().mul(y);
                cache.pos.push(next);
            }
            Ok(cache.pos[i as usize].clone())
        } else {
            if cache.neg.is_empty() {
                cache.neg.push(PrecSeries::one(&self.residue, self.prec.max(y.prec()) * 4));
                cache.neg.push(y.inv()?);
            }
            while (cache.neg.len() as i64) <= -i {
                let next = cache.neg.last().unwrap().mul(&cache.neg[1]);
                cache.neg.push(next);
            }
            Ok(cache.neg[(-i) as usize].clone())
        }
    }
}

/// A local field presented as a tower over `K = F_q((t))`.
///
/// Elements of every layer are Laurent series in that layer's uniformizer over its
/// residue field; prefixes of a tower are subfields.
#[derive(Clone)]
pub struct TowerField {
    pub(crate) layers: Arc<[Arc<Layer>]>,
}

impl PartialEq for TowerField {
    fn eq(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(other.layers.iter())
                .all(|(a, b)| Arc::ptr_eq(a, b))
    }
}
impl Eq for TowerField {}

impl fmt::Debug for TowerField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TowerField(q={}, depth={}, e={}, f={}, prec={})",
            self.base_q(),
            self.depth(),
            self.e(),
            self.f(),
            self.prec()
        )
    }
}

impl TowerField {
    /// `F_q((t))` with `q = p^s`, working to absolute precision `prec` in `t`.
    pub fn base(p: u32, s: u32, prec: i64) -> Result<TowerField> {
        if prec < 1 {
            return Err(Error::Usage("working precision must be positive".into()));
        }
        let residue = FiniteField::new(p, s)?;
        let layer = Layer::new(LayerKind::Base { p, s }, residue, 1, 1, prec, 0, None, None);
        Ok(TowerField {
            layers: Arc::from(vec![Arc::new(layer)]),
        })
    }

    pub(crate) fn top(&self) -> &Arc<Layer> {
        self.layers.last().unwrap()
    }

    pub(crate) fn push(&self, layer: Layer) -> TowerField {
        let mut v: Vec<Arc<Layer>> = self.layers.to_vec();
        v.push(Arc::new(layer));
        TowerField { layers: Arc::from(v) }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// The sub-tower made of the first `depth` layers.
    pub fn prefix(&self, depth: usize) -> Result<TowerField> {
        if depth == 0 || depth > self.depth() {
            return Err(Error::Usage(format!("no prefix of depth {depth}")));
        }
        Ok(TowerField {
            layers: Arc::from(self.layers[..depth].to_vec()),
        })
    }

    pub fn base_field(&self) -> TowerField {
        self.prefix(1).unwrap()
    }

    pub fn is_prefix_of(&self, other: &TowerField) -> bool {
        self.depth() <= other.depth()
            && self
                .layers
                .iter()
                .zip(other.layers.iter())
                .all(|(a, b)| Arc::ptr_eq(a, b))
    }

    pub fn layer_kind(&self, depth_index: usize) -> &LayerKind {
        &self.layers[depth_index].kind
    }

    pub fn p(&self) -> u32 {
        match self.layers[0].kind {
            LayerKind::Base { p, .. } => p,
            _ => unreachable!(),
        }
    }

    /// Size `q` of the base residue field.
    pub fn base_q(&self) -> u64 {
        self.layers[0].residue.order() as u64
    }

    /// Ramification index over the base.
    pub fn e(&self) -> u32 {
        self.top().e
    }
    /// Residue degree over the base.
    pub fn f(&self) -> u32 {
        self.top().f
    }
    pub fn degree(&self) -> u64 {
        self.e() as u64 * self.f() as u64
    }
    /// Size of the residue field.
    pub fn q_l(&self) -> u64 {
        self.residue().order() as u64
    }
    pub fn residue(&self) -> &Arc<FiniteField> {
        &self.top().residue
    }
    /// Working absolute precision, in the top uniformizer.
    pub fn prec(&self) -> i64 {
        self.top().prec
    }
    /// Working precision expressed in powers of `t` (rounded down).
    pub fn t_prec(&self) -> i64 {
        self.prec().div_euclid(self.e() as i64)
    }

    /// `mu(D(L|K))`.
    /// Valuation of the different over `K` in units of the top uniformizer.
    pub(crate) fn different_exponent(&self) -> i64 {
        self.top().different
    }

    pub fn different_valuation(&self) -> RationalValuation {
        RationalValuation::new(self.top().different, self.e() as i64)
    }

    /// Residue extension of degree `f`.
    pub fn extend_unramified(&self, f: u32) -> Result<TowerField> {
        if f == 0 {
            return Err(Error::Usage("unramified degree must be positive".into()));
        }
        if f == 1 {
            return Ok(self.clone());
        }
        let top = self.top();
        let residue = FiniteField::new(self.p(), top.residue.degree() * f)?;
        let map = ResidueEmbedding::new(&top.residue, &residue)?;
        let pi = PrecSeries::monomial(&residue, 1, 1, i64::MAX / 8);
        let layer = Layer::new(
            LayerKind::Unramified { degree: f },
            residue,
            top.e,
            top.f * f,
            top.prec,
            top.different,
            Some(pi),
            Some(map),
        );
        Ok(self.push(layer))
    }

    /// Adjoins a root of the monic Eisenstein polynomial `coeffs[0] + ... + coeffs[d] X^d`
    /// (`coeffs[d] = 1`) and makes it the new uniformizer.
    pub fn extend_eisenstein(&self, coeffs: &[FieldElement]) -> Result<TowerField> {
        if coeffs.len() < 2 {
            return Err(Error::Domain("Eisenstein polynomial must have degree >= 1".into()));
        }
        let d = coeffs.len() - 1;
        for c in coeffs {
            if c.field() != self {
                return Err(Error::Usage("polynomial coefficients live in another field".into()));
            }
        }
        let lead = coeffs[d].repr();
        if lead.valuation() != Some(0) || lead.raw_coeffs().len() != 1 || lead.raw_coeffs()[0] != 1 {
            return Err(Error::Domain(format!("polynomial is not monic (leading coefficient {lead:?})")));
        }
        for (j, c) in coeffs[..d].iter().enumerate() {
            let v = c.repr().valuation();
            let ok = if j == 0 { v == Some(1) } else { v.is_none_or(|v| v >= 1) };
            if !ok {
                return Err(Error::Domain(format!(
                    "not Eisenstein: coefficient of X^{j} has valuation {:?}",
                    v
                )));
            }
            if c.repr().prec() < 2 {
                return Err(Error::precision(2, c.repr().prec(), "Eisenstein coefficient"));
            }
        }
        let c: Vec<PrecSeries> = coeffs[..d].iter().map(|c| c.repr().clone()).collect();
        if d == 1 {
            // root -c_0 equal to the current uniformizer: nothing to adjoin
            let root = c[0].neg();
            if root.raw_coeffs() == [1] && root.val() == 1 {
                return Ok(self.clone());
            }
        }
        let top = self.top();
        let residue = top.residue.clone();
        let new_prec = top.prec * d as i64;
        let y = solve_lower_uniformizer(&c, d, &residue, new_prec)?;
        // derivative of the polynomial at the new uniformizer gives the layer different
        let mut dphi = PrecSeries::monomial(&residue, residue.int_scalar(d as i64), d as i64 - 1, new_prec);
        for (j, cj) in c.iter().enumerate().skip(1) {
            let term = cj.compose(&y)?.scale(residue.int_scalar(j as i64)).shift(j as i64 - 1);
            dphi = dphi.add(&term);
        }
        let layer_diff = dphi.valuation().ok_or_else(|| {
            Error::precision(new_prec, dphi.prec(), "different of the new layer vanishes to precision")
        })?;
        let layer = Layer::new(
            LayerKind::Eisenstein {
                degree: d as u32,
                minpoly: Some(c),
            },
            residue,
            top.e * d as u32,
            top.f,
            new_prec,
            top.different * d as i64 + layer_diff,
            Some(y),
            None,
        );
        Ok(self.push(layer))
    }

    /// Same field as `self`, presented with `w` (a uniformizer) as the new top uniformizer.
    pub fn reparametrize(&self, w: &FieldElement) -> Result<TowerField> {
        if w.field() != self {
            return Err(Error::Usage("new uniformizer lives in another field".into()));
        }
        if w.repr().valuation() != Some(1) {
            return Err(Error::Domain("new uniformizer must have valuation 1/e".into()));
        }
        let top = self.top();
        let residue = top.residue.clone();
        let y = solve_lower_uniformizer(&[w.repr().neg()], 1, &residue, top.prec)?;
        let layer = Layer::new(
            LayerKind::Eisenstein {
                degree: 1,
                minpoly: Some(vec![w.repr().neg()]),
            },
            residue,
            top.e,
            top.f,
            top.prec,
            top.different,
            Some(y),
            None,
        );
        Ok(self.push(layer))
    }

    /// Pushes a totally ramified layer given directly by its embedding series.
    pub(crate) fn extend_by_embedding(
        &self,
        degree: u32,
        lower_uniformizer: PrecSeries,
        different: i64,
        minpoly: Option<Vec<PrecSeries>>,
    ) -> Result<TowerField> {
        let top = self.top();
        if lower_uniformizer.valuation() != Some(degree as i64) {
            return Err(Error::Domain("embedding series has the wrong valuation".into()));
        }
        let layer = Layer::new(
            LayerKind::Eisenstein { degree, minpoly },
            top.residue.clone(),
            top.e * degree,
            top.f,
            top.prec * degree as i64,
            different,
            Some(lower_uniformizer),
            None,
        );
        Ok(self.push(layer))
    }

    /// The lower uniformizer of the top layer, as a series in the top uniformizer.
    pub fn embedding_series(&self) -> Option<&PrecSeries> {
        self.top().lower_uniformizer.as_ref()
    }

    pub fn describe(&self) -> Vec<String> {
        self.layers
            .iter()
            .map(|l| match &l.kind {
                LayerKind::Base { p, s } => format!("base F_{}^{}((t))", p, s),
                LayerKind::Unramified { degree } => format!("unramified degree {degree}"),
                LayerKind::Eisenstein { degree, .. } => format!("eisenstein degree {degree}"),
            })
            .collect()
    }
}

/// Solves `c_0(y) + c_1(y) X + ... + c_{d-1}(y) X^{d-1} + X^d = 0` for the series `y(X)`
/// of valuation `d` by Newton iteration (the derivative in `y` is a unit).
fn solve_lower_uniformizer(
    c: &[PrecSeries],
    d: usize,
    residue: &Arc<FiniteField>,
    prec: i64,
) -> Result<PrecSeries> {
    let w0 = c[0].coeff(1);
    let dc: Vec<PrecSeries> = c.iter().map(|s| s.derivative()).collect();
    let x_d = PrecSeries::monomial(residue, 1, d as i64, prec);
    let mut y = PrecSeries::monomial(residue, residue.neg(residue.inv(w0)?), d as i64, prec);
    let eval = |y: &PrecSeries| -> Result<(PrecSeries, PrecSeries)> {
        let mut phi = x_d.clone();
        let mut dphi = PrecSeries::zero(residue, prec);
        for j in 0..d {
            phi = phi.add(&c[j].compose(y)?.shift(j as i64));
            dphi = dphi.add(&dc[j].compose(y)?.shift(j as i64));
        }
        Ok((phi, dphi))
    };
    for _ in 0..64 {
        let (phi, dphi) = eval(&y)?;
        if phi.is_zero() {
            if phi.prec() < prec {
                return Err(Error::precision(
                    prec,
                    phi.prec(),
                    "embedding series of an Eisenstein layer",
                ));
            }
            return Ok(y.truncate(prec));
        }
        let corr = phi.div(&dphi)?;
        if corr.val() <= d as i64 && y.val() == d as i64 && corr.val() < y.val() {
            return Err(Error::Domain("Newton iteration for the new uniformizer diverged".into()));
        }
        y = y.sub(&corr).truncate(prec);
        if y.valuation() != Some(d as i64) {
            return Err(Error::Domain("Newton iteration lost the valuation of the root".into()));
        }
    }
    Err(Error::Domain("Newton iteration for the new uniformizer failed to converge".into()))
}
