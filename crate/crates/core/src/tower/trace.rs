use crate::error::{Error, Result};
use crate::series::PrecSeries;

use super::field::Layer;
use super::{FieldElement, LayerKind, TowerField};

impl FieldElement {
    /// Coordinates of `self` over the field one layer down, in the basis
    /// `1, pi, ..., pi^(d-1)` for an Eisenstein layer and `1, w, ..., w^(f-1)` (powers of
    /// the residue generator) for an unramified one.
    pub fn digits(&self) -> Result<Vec<FieldElement>> {
        let field = self.field();
        if field.depth() < 2 {
            return Err(Error::Usage("the base field has no sub-layer".into()));
        }
        let lower = field.prefix(field.depth() - 1)?;
        let layer = field.top();
        match &layer.kind {
            LayerKind::Eisenstein { degree, .. } => eisenstein_digits(self.repr(), layer, *degree as i64)
                .map(|ds| ds.into_iter().map(|s| FieldElement::wrap(&lower, s)).collect()),
            LayerKind::Unramified { degree } => unramified_digits(self.repr(), layer, *degree)
                .map(|ds| ds.into_iter().map(|s| FieldElement::wrap(&lower, s)).collect()),
            LayerKind::Base { .. } => unreachable!(),
        }
    }

    /// Projection onto the sub-tower `sub`, for an element known to lie in it.
    pub fn descend(&self, sub: &TowerField) -> Result<FieldElement> {
        if !sub.is_prefix_of(self.field()) {
            return Err(Error::Usage("descent target is not a sub-tower".into()));
        }
        let mut x = self.clone();
        while x.field().depth() > sub.depth() {
            let ds = x.digits()?;
            if let Some(j) = ds.iter().skip(1).position(|d| !d.is_zero()) {
                return Err(Error::Domain(format!(
                    "element does not lie in the subfield (coordinate {} is nonzero)",
                    j + 1
                )));
            }
            x = ds.into_iter().next().unwrap();
        }
        Ok(x)
    }

    /// Relative trace to the sub-tower `sub`.
    pub fn trace_to(&self, sub: &TowerField) -> Result<FieldElement> {
        self.step_down(sub, |x| x.trace_one_layer())
    }

    /// Relative norm to the sub-tower `sub`.
    pub fn norm_to(&self, sub: &TowerField) -> Result<FieldElement> {
        self.step_down(sub, |x| x.norm_one_layer())
    }

    /// Trace to `F_q((t))`.
    pub fn trace(&self) -> Result<FieldElement> {
        self.trace_to(&self.field().base_field())
    }

    /// Norm to `F_q((t))`.
    pub fn norm(&self) -> Result<FieldElement> {
        self.norm_to(&self.field().base_field())
    }

    fn step_down(
        &self,
        sub: &TowerField,
        step: impl Fn(&FieldElement) -> Result<FieldElement>,
    ) -> Result<FieldElement> {
        if !sub.is_prefix_of(self.field()) {
            return Err(Error::Usage("trace/norm target is not a sub-tower".into()));
        }
        let mut x = self.clone();
        while x.field().depth() > sub.depth() {
            x = step(&x)?;
        }
        Ok(x)
    }

    fn trace_one_layer(&self) -> Result<FieldElement> {
        let field = self.field();
        let lower = field.prefix(field.depth() - 1)?;
        let layer = field.top();
        match &layer.kind {
            LayerKind::Eisenstein { degree, .. } => {
                let d = *degree as i64;
                let mut acc = PrecSeries::zero(&layer.residue, i64::MAX / 4);
                for j in 0..d {
                    let ds = eisenstein_digits(&self.repr().shift(j), layer, d)?;
                    acc = acc.add(&ds[j as usize]);
                }
                Ok(FieldElement::wrap(&lower, acc))
            }
            LayerKind::Unramified { degree } => {
                let conj = conjugates(self.repr(), layer, *degree);
                let sum = conj.iter().skip(1).fold(conj[0].clone(), |a, b| a.add(b));
                Ok(FieldElement::wrap(&lower, pull_back(&sum, layer)?))
            }
            LayerKind::Base { .. } => unreachable!(),
        }
    }

    fn norm_one_layer(&self) -> Result<FieldElement> {
        let field = self.field();
        let lower = field.prefix(field.depth() - 1)?;
        let layer = field.top();
        match &layer.kind {
            LayerKind::Eisenstein { degree, .. } => {
                let d = *degree as usize;
                if d == 1 {
                    return Ok(FieldElement::wrap(
                        &lower,
                        eisenstein_digits(self.repr(), layer, 1)?.remove(0),
                    ));
                }
                // column j holds the coordinates of x * pi^j
                let mut matrix = vec![Vec::with_capacity(d); d];
                for j in 0..d {
                    let ds = eisenstein_digits(&self.repr().shift(j as i64), layer, d as i64)?;
                    for (r, s) in ds.into_iter().enumerate() {
                        matrix[r].push(FieldElement::wrap(&lower, s));
                    }
                }
                Ok(determinant(&matrix, &lower))
            }
            LayerKind::Unramified { degree } => {
                let conj = conjugates(self.repr(), layer, *degree);
                let prod = conj.iter().skip(1).fold(conj[0].clone(), |a, b| a.mul(b));
                Ok(FieldElement::wrap(&lower, pull_back(&prod, layer)?))
            }
            LayerKind::Base { .. } => unreachable!(),
        }
    }
}

/// Division-free determinant: dynamic programming over the set of used columns.
pub(crate) fn determinant(m: &[Vec<FieldElement>], field: &TowerField) -> FieldElement {
    let d = m.len();
    let mut dp: Vec<Option<FieldElement>> = vec![None; 1 << d];
    dp[0] = Some(FieldElement::one(field));
    for mask in 0usize..(1 << d) {
        let Some(cur) = dp[mask].take() else { continue };
        let r = mask.count_ones() as usize;
        if r == d {
            dp[mask] = Some(cur);
            continue;
        }
        for c in 0..d {
            if mask & (1 << c) != 0 || m[r][c].is_zero() && m[r][c].prec() >= field.prec() {
                continue;
            }
            let inversions = (mask >> (c + 1)).count_ones();
            let mut term = &cur * &m[r][c];
            if inversions % 2 == 1 {
                term = -&term;
            }
            let next = mask | (1 << c);
            dp[next] = Some(match dp[next].take() {
                Some(acc) => &acc + &term,
                None => term,
            });
        }
    }
    dp[(1 << d) - 1]
        .take()
        .unwrap_or_else(|| FieldElement::zero(field))
}

/// Greedy lowest-term elimination: `x = sum_j a_j(y) pi^j`, `y = c pi^d + ...`.
fn eisenstein_digits(x: &PrecSeries, layer: &Layer, d: i64) -> Result<Vec<PrecSeries>> {
    let f = &layer.residue;
    let y = layer.lower_uniformizer.as_ref().unwrap();
    let c = y.leading_coeff().ok_or_else(|| Error::Inconsistency("zero embedding series".into()))?;
    let c_inv = f.inv(c)?;
    let mut r = x.clone();
    let mut found: Vec<Vec<(i64, u32)>> = vec![Vec::new(); d as usize];
    while let Some(l) = r.valuation() {
        let i = l.div_euclid(d);
        let j = l - d * i;
        let a = f.mul(r.leading_coeff().unwrap(), f.pow(c_inv, i)?);
        found[j as usize].push((i, a));
        let sub = layer.lower_power(i)?.shift(j).scale(a);
        let next = r.sub(&sub);
        r = if next.prec() < r.prec() { next } else { next.truncate(r.prec()) };
        if r.val() <= l && !r.is_zero() {
            return Err(Error::Inconsistency("digit extraction failed to advance".into()));
        }
    }
    let p = r.prec();
    Ok(found
        .into_iter()
        .enumerate()
        .map(|(j, terms)| {
            let prec = (p - j as i64 + d - 1).div_euclid(d);
            let lo = terms.first().map_or(prec, |t| t.0);
            let mut coeffs = vec![0u32; (prec - lo).max(0) as usize];
            for (i, a) in terms {
                if i < prec {
                    let k = (i - lo) as usize;
                    coeffs[k] = f.add(coeffs[k], a);
                }
            }
            PrecSeries::from_coeffs(f, lo, coeffs, prec)
        })
        .collect())
}

/// Coordinates in the basis `1, w, ..., w^(f-1)` of the residue extension, coefficientwise.
fn unramified_digits(x: &PrecSeries, layer: &Layer, f: u32) -> Result<Vec<PrecSeries>> {
    let map = layer.residue_map.as_ref().unwrap();
    let big = &layer.residue;
    let small = &map.from;
    // coordinates of b over the image of the small field: solve by enumerating the basis
    // expansion of a linear system over F_p
    let basis = residue_basis(big, f);
    let solve = |b: u32| -> Result<Vec<u32>> { solve_residue(b, &basis, map, big, small, f) };
    let mut cols: Vec<Vec<u32>> = vec![Vec::with_capacity(x.raw_coeffs().len()); f as usize];
    for &b in x.raw_coeffs() {
        let coords = solve(b)?;
        for (k, a) in coords.into_iter().enumerate() {
            cols[k].push(a);
        }
    }
    Ok(cols
        .into_iter()
        .map(|c| PrecSeries::from_coeffs(small, x.val(), c, x.prec()))
        .collect())
}

fn residue_basis(big: &crate::fq::FiniteField, f: u32) -> Vec<u32> {
    let w = big.generator();
    let mut out = vec![1u32];
    for _ in 1..f {
        out.push(big.mul(*out.last().unwrap(), w));
    }
    out
}

fn solve_residue(
    b: u32,
    basis: &[u32],
    map: &crate::fq::ResidueEmbedding,
    big: &crate::fq::FiniteField,
    small: &crate::fq::FiniteField,
    f: u32,
) -> Result<Vec<u32>> {
    // The small field has at most 2^16 elements and f is small; solve the F_p-linear system
    // by Gaussian elimination on prime-field coordinates.
    let p = big.characteristic();
    let ks = small.degree() as usize;
    let kb = big.degree() as usize;
    let n = ks * f as usize;
    // unknowns: prime coordinates of a_k, columns: image of (p-basis of small) * basis_k
    let mut rows: Vec<Vec<u32>> = vec![vec![0; n + 1]; kb];
    for (k, &bk) in basis.iter().enumerate() {
        for u in 0..ks {
            let mut e = vec![0u32; ks];
            e[u] = 1;
            let unit = small.from_coords(&e)?;
            let col = big.coords(big.mul(map.apply(unit), bk));
            for (r, v) in col.into_iter().enumerate() {
                rows[r][k * ks + u] = v;
            }
        }
    }
    for (r, v) in big.coords(b).into_iter().enumerate() {
        rows[r][n] = v;
    }
    let sol = solve_mod_p(rows, n, p).ok_or_else(|| {
        Error::Inconsistency("residue basis is not a basis of the extension".into())
    })?;
    (0..f as usize)
        .map(|k| small.from_coords(&sol[k * ks..(k + 1) * ks]))
        .collect()
}

fn solve_mod_p(mut rows: Vec<Vec<u32>>, n: usize, p: u32) -> Option<Vec<u32>> {
    let pp = p as u64;
    let inv = |a: u32| -> u32 { (1..p).find(|&x| (a as u64 * x as u64) % pp == 1).unwrap() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c] != 0) else { continue };
        rows.swap(r, k);
        let iv = inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = ((*v as u64 * iv as u64) % pp) as u32;
        }
        for k in 0..rows.len() {
            if k != r && rows[k][c] != 0 {
                let factor = rows[k][c] as u64;
                for col in 0..=n {
                    let sub = (factor * rows[r][col] as u64) % pp;
                    rows[k][col] = ((rows[k][col] as u64 + pp - sub) % pp) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() < n {
        return None;
    }
    let mut sol = vec![0u32; n];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rows[i][n];
    }
    Some(sol)
}

/// `sigma^i(x)` for `i < f`, where `sigma` raises coefficients to the power `|k|`.
fn conjugates(x: &PrecSeries, layer: &Layer, f: u32) -> Vec<PrecSeries> {
    let big = &layer.residue;
    let step = layer.residue_map.as_ref().unwrap().from.degree();
    (0..f)
        .map(|i| {
            let coeffs = x
                .raw_coeffs()
                .iter()
                .map(|&a| big.frobenius_pow(a, step * i))
                .collect();
            PrecSeries::from_coeffs(big, x.val(), coeffs, x.prec())
        })
        .collect()
}

fn pull_back(x: &PrecSeries, layer: &Layer) -> Result<PrecSeries> {
    let map = layer.residue_map.as_ref().unwrap();
    let coeffs = x
        .raw_coeffs()
        .iter()
        .map(|&b| {
            map.preimage(b).ok_or_else(|| {
                Error::Inconsistency("Galois-invariant coefficient outside the subfield".into())
            })
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(PrecSeries::from_coeffs(&map.from, x.val(), coeffs, x.prec()))
}
