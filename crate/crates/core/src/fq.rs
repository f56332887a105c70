//! Finite fields `F_{p^k}` for small `p^k`.
//!
//! Elements are encoded as integers `0 <= x < p^k` whose base-`p` digits are the
//! coordinates in the polynomial basis `1, w, ..., w^{k-1}`, where `w` is a root of the
//! lexicographically least monic irreducible polynomial of degree `k` over `F_p`.
//! Multiplication goes through discrete-log tables.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest field order we are willing to tabulate.
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

pub struct FiniteField {
    p: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (modulus {:?})", self.p, self.degree, self.modulus)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.degree == other.degree
    }
}
impl Eq for FiniteField {}

fn registry() -> &'static Mutex<HashMap<(u32, u32), Arc<FiniteField>>> {
    static REG: OnceLock<Mutex<HashMap<(u32, u32), Arc<FiniteField>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomials over F_p, low degree first, used only while building tables.
fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1;
        let c = (r[k] * lead_inv) % p;
        for i in 0..=dm {
            let idx = k - dm + i;
            r[idx] = (r[idx] + p - (c * m[i]) % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn digits(mut x: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    for d in 1..=n / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = digits(idx as u32, p, d as u32);
            g.push(1);
            let r = poly_rem(f, &g, p);
            if r.is_empty() {
                return false;
            }
        }
    }
    true
}

fn least_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = (p as u64).pow(k);
    for idx in 0..count {
        let mut f = digits(idx as u32, p, k);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FiniteField {
    /// Returns the shared field `F_{p^k}`.
    pub fn new(p: u32, k: u32) -> Result<Arc<FiniteField>> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::Domain("extension degree must be positive".into()));
        }
        let order = (p as u64)
            .checked_pow(k)
            .filter(|&o| o <= MAX_FIELD_ORDER)
            .ok_or_else(|| Error::Unsupported(format!("field of order {p}^{k} is too large")))?;
        let mut reg = registry().lock().unwrap();
        if let Some(f) = reg.get(&(p, k)) {
            return Ok(f.clone());
        }
        let f = Arc::new(Self::build(p, k, order as u32));
        reg.insert((p, k), f.clone());
        Ok(f)
    }

    fn build(p: u32, k: u32, order: u32) -> FiniteField {
        let modulus = least_irreducible(p, k);
        let slow_mul = |a: u32, b: u32| -> u32 {
            let da = digits(a, p, k);
            let db = digits(b, p, k);
            let mut prod = vec![0u32; (2 * k) as usize];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let mut r = poly_rem(&prod, &modulus, p);
            r.resize(k as usize, 0);
            undigits(&r, p)
        };
        let mut exp = vec![0u32; (order - 1) as usize];
        let mut log = vec![0u32; order as usize];
        'search: for g in 1..order {
            let mut x = 1u32;
            for i in 0..(order - 1) {
                if i > 0 && x == 1 {
                    continue 'search;
                }
                exp[i as usize] = x;
                x = slow_mul(x, g);
            }
            if x != 1 {
                continue;
            }
            for (i, &e) in exp.iter().enumerate() {
                log[e as usize] = i as u32;
            }
            break;
        }
        FiniteField {
            p,
            degree: k,
            order,
            modulus,
            exp,
            log,
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }
    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    /// The defining polynomial over `F_p`, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn zero(&self) -> u32 {
        0
    }
    #[inline]
    pub fn one(&self) -> u32 {
        1
    }

    /// Element `w`, the class of the polynomial variable (equals 0 when `k = 1`).
    pub fn generator(&self) -> u32 {
        if self.degree == 1 {
            0
        } else {
            self.p
        }
    }

    /// Image of the integer `n` under `Z -> F_p -> F_{p^k}`.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    pub fn coords(&self, a: u32) -> Vec<u32> {
        digits(a, self.p, self.degree)
    }

    pub fn from_coords(&self, c: &[u32]) -> Result<u32> {
        if c.len() != self.degree as usize || c.iter().any(|&x| x >= self.p) {
            return Err(Error::Usage(format!("bad coordinate vector {c:?} for {self:?}")));
        }
        Ok(undigits(c, self.p))
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.degree == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..self.degree {
            r += ((a % p + b % p) % p) * pw;
            pw *= p;
            a /= p;
            b /= p;
        }
        r
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        if self.degree == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let p = self.p;
        let mut a = a;
        let mut r = 0;
        let mut pw = 1;
        for _ in 0..self.degree {
            r += ((p - a % p) % p) * pw;
            pw *= p;
            a /= p;
        }
        r
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.order - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(if s >= n { s - n } else { s }) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::Domain("inversion of zero in a finite field".into()));
        }
        let n = self.order - 1;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    /// `a^e` for any integer `e` (`0^0 = 1`; negative powers of zero are an error).
    pub fn pow(&self, a: u32, e: i64) -> Result<u32> {
        if a == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Greater => Ok(0),
                std::cmp::Ordering::Less => Err(Error::Domain("negative power of zero".into())),
            };
        }
        let n = (self.order - 1) as i64;
        let l = (self.log[a as usize] as i64 * e.rem_euclid(n)) % n;
        Ok(self.exp[l as usize])
    }

    #[inline]
    fn pow_u(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let n = (self.order - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize]
    }

    /// The absolute Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow_u(a, self.p as u64)
    }

    /// `a -> a^(p^j)`.
    pub fn frobenius_pow(&self, a: u32, j: u32) -> u32 {
        let mut x = a;
        for _ in 0..(j % self.degree.max(1)) {
            x = self.frobenius(x);
        }
        x
    }

    /// Image of the integer `i` (as an exponent factor) in the prime field.
    #[inline]
    pub fn int_scalar(&self, i: i64) -> u32 {
        i.rem_euclid(self.p as i64) as u32
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order
    }

    pub fn format(&self, a: u32) -> String {
        if self.degree == 1 {
            return a.to_string();
        }
        let c = self.coords(a);
        let mut parts = Vec::new();
        for (i, &x) in c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{i}"),
            };
            parts.push(match (x, i) {
                (_, 0) => x.to_string(),
                (1, _) => mono,
                _ => format!("{x}*{mono}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("({})", parts.join("+"))
        }
    }
}

/// A field element bundled with its field, for standalone use.
#[derive(Clone)]
pub struct FqElement {
    field: Arc<FiniteField>,
    value: u32,
}

impl fmt::Debug for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(self.value))
    }
}

impl PartialEq for FqElement {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.value == other.value
    }
}
impl Eq for FqElement {}

impl FqElement {
    pub fn new(field: &Arc<FiniteField>, value: u32) -> Result<Self> {
        if value >= field.order() {
            return Err(Error::Usage(format!("{value} is not an element of {field:?}")));
        }
        Ok(FqElement {
            field: field.clone(),
            value,
        })
    }
    pub fn from_coords(field: &Arc<FiniteField>, coords: &[u32]) -> Result<Self> {
        Ok(FqElement {
            field: field.clone(),
            value: field.from_coords(coords)?,
        })
    }
    pub fn value(&self) -> u32 {
        self.value
    }
    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }
    pub fn coords(&self) -> Vec<u32> {
        self.field.coords(self.value)
    }
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same(&self, other: &FqElement) -> Result<()> {
        if *self.field != *other.field {
            return Err(Error::Usage(format!(
                "mixing elements of {:?} and {:?}",
                self.field, other.field
            )));
        }
        Ok(())
    }
    fn wrap(&self, value: u32) -> Self {
        FqElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn add(&self, other: &FqElement) -> Result<Self> {
        self.same(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }
    pub fn sub(&self, other: &FqElement) -> Result<Self> {
        self.same(other)?;
        Ok(self.wrap(self.field.sub(self.value, other.value)))
    }
    pub fn mul(&self, other: &FqElement) -> Result<Self> {
        self.same(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }
    pub fn neg(&self) -> Self {
        self.wrap(self.field.neg(self.value))
    }
    pub fn inv(&self) -> Result<Self> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }
    pub fn pow(&self, e: i64) -> Result<Self> {
        Ok(self.wrap(self.field.pow(self.value, e)?))
    }
    pub fn frobenius(&self) -> Self {
        self.wrap(self.field.frobenius(self.value))
    }
}

/// An embedding `F_{p^a} -> F_{p^b}` for `a | b`, sending `w_a` to the least root of its
/// modulus in the larger field.
#[derive(Debug)]
pub struct ResidueEmbedding {
    pub from: Arc<FiniteField>,
    pub to: Arc<FiniteField>,
    image: Vec<u32>,
    preimage: HashMap<u32, u32>,
}

impl ResidueEmbedding {
    pub fn new(from: &Arc<FiniteField>, to: &Arc<FiniteField>) -> Result<Self> {
        if from.characteristic() != to.characteristic() || to.degree() % from.degree() != 0 {
            return Err(Error::Usage(format!("no embedding {from:?} -> {to:?}")));
        }
        let modulus = from.modulus();
        let root = to
            .elements()
            .find(|&x| {
                let v = modulus
                    .iter()
                    .rev()
                    .fold(0u32, |acc, &c| to.add(to.mul(acc, x), c));
                v == 0
            })
            .ok_or_else(|| Error::Inconsistency("modulus has no root in the extension".into()))?;
        let mut image = Vec::with_capacity(from.order() as usize);
        let mut preimage = HashMap::new();
        for a in from.elements() {
            let c = from.coords(a);
            let v = c
                .iter()
                .rev()
                .fold(0u32, |acc, &ci| to.add(to.mul(acc, root), ci));
            image.push(v);
            preimage.insert(v, a);
        }
        Ok(ResidueEmbedding {
            from: from.clone(),
            to: to.clone(),
            image,
            preimage,
        })
    }

    #[inline]
    pub fn apply(&self, a: u32) -> u32 {
        self.image[a as usize]
    }

    /// Inverse image, if `b` lies in the subfield.
    pub fn preimage(&self, b: u32) -> Option<u32> {
        self.preimage.get(&b).copied()
    }
}
