//! Exact SU(2) angular-momentum algebra: half-integer quantum numbers,
//! triangle selection rules, Clebsch-Gordan coefficients, and Wigner 6-j
//! symbols.
//!
//! Coefficients are evaluated through Racah's closed forms with exact
//! rational arithmetic on the factorial ratios, converting to `f64` only at
//! the very end. The alternating sums otherwise cancel catastrophically
//! already at moderate momenta. Condon-Shortley phases throughout.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::{LazyLock, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// An exact half-integer, stored as twice its value so that selection rules
/// never touch floating point.
///
/// Angular-momentum magnitudes (`j`, `q`) are non-negative; projections `m`
/// may be negative with `|m| <= j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    /// Build from twice the value: `from_twice(3)` is 3/2.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    pub const fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }

    /// All half-integers `0, 1/2, 1, ..., max` inclusive.
    pub fn range_inclusive(max: HalfInt) -> impl Iterator<Item = HalfInt> {
        (0..=max.twice).map(HalfInt::from_twice)
    }

    /// Projections `-j, -j+1, ..., +j` of a magnitude `j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let tj = self.twice;
        (-tj..=tj).step_by(2).map(HalfInt::from_twice)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"1"`, and decimal forms like `"0.5"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad half-integer {s:?}")))?;
            let den: i32 = den
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad half-integer {s:?}")))?;
            return match den {
                1 => Ok(HalfInt::from_int(num)),
                2 => Ok(HalfInt::from_twice(num)),
                _ => Err(Error::Parse(format!(
                    "half-integer denominator must be 1 or 2, got {s:?}"
                ))),
            };
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(HalfInt::from_int(n));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad half-integer {s:?}")))?;
        HalfInt::try_from_f64(v).ok_or_else(|| Error::Parse(format!("{s:?} is not a half-integer")))
    }
}

impl HalfInt {
    pub fn try_from_f64(v: f64) -> Option<Self> {
        let twice = 2.0 * v;
        if twice.fract() == 0.0 && twice.abs() <= f64::from(i32::MAX) {
            Some(HalfInt::from_twice(twice as i32))
        } else {
            None
        }
    }
}

/// Multiplicity of the spin-`j` irrep: `dim(j) = 2j + 1`.
pub fn dim(j: HalfInt) -> usize {
    debug_assert!(j.twice() >= 0, "dim of a negative magnitude");
    (j.twice() + 1) as usize
}

/// Triangle rule: `|a-b| <= c <= a+b` with `a+b+c` an integer.
pub fn triangle_ok(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (ta, tb, tc) = (a.twice(), b.twice(), c.twice());
    ta >= 0
        && tb >= 0
        && tc >= 0
        && (ta + tb + tc) % 2 == 0
        && tc <= ta + tb
        && tc >= (ta - tb).abs()
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// `(a+b-c)! (a-b+c)! (-a+b+c)! / (a+b+c+1)!` as an exact rational.
fn triangle_coefficient(a: HalfInt, b: HalfInt, c: HalfInt) -> BigRational {
    let (ta, tb, tc) = (a.twice(), b.twice(), c.twice());
    let num = factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2)
        * factorial((-ta + tb + tc) / 2);
    let den = factorial((ta + tb + tc) / 2 + 1);
    BigRational::new(num, den)
}

/// Sign times the square root of a non-negative rational, as `f64`.
fn signed_sqrt(sign: &BigRational, radicand: &BigRational) -> f64 {
    let s = if sign.is_negative() { -1.0 } else { 1.0 };
    s * sign.abs().to_f64().unwrap_or(f64::NAN)
        * radicand.to_f64().unwrap_or(f64::NAN).sqrt()
}

type SymbolKey = [i32; 6];

static CG_CACHE: LazyLock<Mutex<HashMap<SymbolKey, f64>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));
static SIX_J_CACHE: LazyLock<Mutex<HashMap<SymbolKey, f64>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>` in the Condon-Shortley
/// convention. Returns 0 for any selection-rule violation instead of erroring.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> f64 {
    if m != m1 + m2 || !triangle_ok(j1, j2, j) {
        return 0.0;
    }
    // Projection bounds, and m must carry the same parity as its j.
    for (jj, mm) in [(j1, m1), (j2, m2), (j, m)] {
        if mm.abs().twice() > jj.twice() || (jj.twice() - mm.twice()) % 2 != 0 {
            return 0.0;
        }
    }

    let key = [
        j1.twice(),
        m1.twice(),
        j2.twice(),
        m2.twice(),
        j.twice(),
        m.twice(),
    ];
    if let Some(&v) = CG_CACHE.lock().unwrap().get(&key) {
        return v;
    }

    // Integer-valued combinations entering the factorials.
    let a1 = (j1.twice() + m1.twice()) / 2; // j1 + m1
    let a2 = (j1.twice() - m1.twice()) / 2; // j1 - m1
    let a3 = (j2.twice() + m2.twice()) / 2; // j2 + m2
    let a4 = (j2.twice() - m2.twice()) / 2; // j2 - m2
    let a5 = (j.twice() + m.twice()) / 2; // J + M
    let a6 = (j.twice() - m.twice()) / 2; // J - M
    let b1 = (j1.twice() + j2.twice() - j.twice()) / 2; // j1 + j2 - J
    let c1 = (j.twice() - j2.twice() + m1.twice()) / 2; // J - j2 + m1
    let c2 = (j.twice() - j1.twice() - m2.twice()) / 2; // J - j1 - m2

    let radicand = BigRational::from(BigInt::from(j.twice() + 1))
        * triangle_coefficient(j1, j2, j)
        * BigRational::from(
            factorial(a1) * factorial(a2) * factorial(a3) * factorial(a4) * factorial(a5)
                * factorial(a6),
        );

    let k_min = 0.max(-c1).max(-c2);
    let k_max = b1.min(a2).min(a3);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(b1 - k)
            * factorial(a2 - k)
            * factorial(a3 - k)
            * factorial(c1 + k)
            * factorial(c2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let value = signed_sqrt(&sum, &radicand);
    CG_CACHE.lock().unwrap().insert(key, value);
    value
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}`. Returns 0 when any of the four
/// triads (j1 j2 j3), (j1 j5 j6), (j4 j2 j6), (j4 j5 j3) violates the
/// triangle rule.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> f64 {
    if !triangle_ok(j1, j2, j3)
        || !triangle_ok(j1, j5, j6)
        || !triangle_ok(j4, j2, j6)
        || !triangle_ok(j4, j5, j3)
    {
        return 0.0;
    }

    let key = [
        j1.twice(),
        j2.twice(),
        j3.twice(),
        j4.twice(),
        j5.twice(),
        j6.twice(),
    ];
    if let Some(&v) = SIX_J_CACHE.lock().unwrap().get(&key) {
        return v;
    }

    let radicand = triangle_coefficient(j1, j2, j3)
        * triangle_coefficient(j1, j5, j6)
        * triangle_coefficient(j4, j2, j6)
        * triangle_coefficient(j4, j5, j3);

    // Racah sum bounds: triad sums below, opposite-pair sums above.
    let a1 = (j1.twice() + j2.twice() + j3.twice()) / 2;
    let a2 = (j1.twice() + j5.twice() + j6.twice()) / 2;
    let a3 = (j4.twice() + j2.twice() + j6.twice()) / 2;
    let a4 = (j4.twice() + j5.twice() + j3.twice()) / 2;
    let b1 = (j1.twice() + j2.twice() + j4.twice() + j5.twice()) / 2;
    let b2 = (j2.twice() + j3.twice() + j5.twice() + j6.twice()) / 2;
    let b3 = (j1.twice() + j3.twice() + j4.twice() + j6.twice()) / 2;

    let k_min = a1.max(a2).max(a3).max(a4);
    let k_max = b1.min(b2).min(b3);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k - a1)
            * factorial(k - a2)
            * factorial(k - a3)
            * factorial(k - a4)
            * factorial(b1 - k)
            * factorial(b2 - k)
            * factorial(b3 - k);
        let term = BigRational::new(factorial(k + 1), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let value = signed_sqrt(&sum, &radicand);
    SIX_J_CACHE.lock().unwrap().insert(key, value);
    value
}
