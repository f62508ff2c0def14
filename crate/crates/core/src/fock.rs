//! Two-mode Fock arithmetic under passive polarization transformations.
//!
//! A beam carries two orthogonal polarization modes. In the reference basis
//! these are `H` and `V`; an analyzer setting `(theta, phi)` defines new modes
//!
//! ```text
//! a_i^dag    =  cos(theta) a_H^dag + sin(theta) e^{i phi} a_V^dag
//! a_iperp^dag = -sin(theta) a_H^dag + cos(theta) e^{i phi} a_V^dag
//! ```
//!
//! and an `n`-photon state `|j, n-j>` written in `H/V` is re-expressed in the
//! `i/iperp` basis by a unitary `(n+1) x (n+1)` matrix. Indices always count
//! photons in the *first* mode of the respective basis.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{contract, Result};

/// Analyzer setting: rotation angle and relative phase on the second mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationSetting {
    pub theta: f64,
    pub phi: f64,
}

impl PolarizationSetting {
    /// Diagonal/antidiagonal basis `{D, A}`.
    pub const DIAGONAL: Self = Self { theta: FRAC_PI_4, phi: 0.0 };
    /// Circular basis `{R, L}`.
    pub const CIRCULAR: Self = Self { theta: -FRAC_PI_4, phi: 3.0 * FRAC_PI_2 };
    /// Rectilinear basis `{H, V}`.
    pub const RECTILINEAR: Self = Self { theta: 0.0, phi: 0.0 };

    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return contract(format!("non-finite polarization setting ({theta}, {phi})"));
        }
        Ok(Self { theta, phi })
    }

    /// Pure SO(2) rotation of the analyzer.
    pub const fn rotation(theta: f64) -> Self {
        Self { theta, phi: 0.0 }
    }

    /// The same analyzer read out with its two output ports exchanged.
    ///
    /// Adding `pi/2` to the angle maps `a_i -> a_iperp` and `a_iperp -> -a_i`,
    /// so photon counts swap exactly for any phase.
    pub fn complementary(self) -> Self {
        Self { theta: self.theta + FRAC_PI_2, phi: self.phi }
    }

    /// Canonical basis by its conventional index (1 = D/A, 2 = R/L, 3 = H/V).
    pub fn canonical(index: usize) -> Option<Self> {
        match index {
            1 => Some(Self::DIAGONAL),
            2 => Some(Self::CIRCULAR),
            3 => Some(Self::RECTILINEAR),
            _ => None,
        }
    }

    fn cache_key(self) -> (u64, u64) {
        // -0.0 and 0.0 describe the same analyzer
        ((self.theta + 0.0).to_bits(), (self.phi + 0.0).to_bits())
    }

    /// Single-photon matrix `u[out][in]`, out in `{i, iperp}`, in in `{H, V}`.
    fn single_photon(self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let phase = Complex64::from_polar(1.0, -self.phi);
        [
            [Complex64::new(c, 0.0), phase * s],
            [Complex64::new(-s, 0.0), phase * c],
        ]
    }
}

/// Photon counts `(j, k)` in the two modes of one beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSplit {
    pub j: usize,
    pub k: usize,
}

impl ModeSplit {
    pub const fn new(j: usize, k: usize) -> Self {
        Self { j, k }
    }

    pub const fn total(self) -> usize {
        self.j + self.k
    }
}

/// `ln(n!)`, tabulated by cumulative summation.
pub fn ln_factorial(n: usize) -> f64 {
    const TABLE_LEN: usize = 2048;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0;
        t.push(0.0);
        for i in 1..TABLE_LEN {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    });
    if n < TABLE_LEN {
        table[n]
    } else {
        table[TABLE_LEN - 1] + (TABLE_LEN..=n).map(|i| (i as f64).ln()).sum::<f64>()
    }
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Amplitude of `|j_out, n - j_out>` (new basis) in the state `|j_in, n - j_in>` (H/V).
///
/// Evaluated from the binomial expansion of
/// `(a_H^dag)^{j_in} (a_V^dag)^{n-j_in}` with
/// `a_H^dag = c a_i^dag - s a_iperp^dag` and
/// `a_V^dag = e^{-i phi} (s a_i^dag + c a_iperp^dag)`.
/// The sum alternates in sign, so it loses roughly `log10 C(n, n/2) - n/2 log10 2`
/// digits; past `n ~ 40` use [`build_transform`], which is exact to rounding.
pub fn transform_coefficient(
    n: usize,
    j_in: usize,
    j_out: usize,
    setting: PolarizationSetting,
) -> Result<Complex64> {
    if j_in > n || j_out > n {
        return contract(format!(
            "split index out of range: j_in = {j_in}, j_out = {j_out}, n = {n}"
        ));
    }
    let (s, c) = setting.theta.sin_cos();
    let k_in = n - j_in;
    let norm = 0.5
        * (ln_factorial(j_out) + ln_factorial(n - j_out) - ln_factorial(j_in) - ln_factorial(k_in));

    // |x|^e * sign(x)^e with 0^0 = 1
    let signed_pow = |x: f64, e: usize| -> (f64, bool) {
        if e == 0 {
            (0.0, false)
        } else {
            (e as f64 * x.abs().ln(), x < 0.0 && e % 2 == 1)
        }
    };

    let p_lo = j_out.saturating_sub(k_in);
    let p_hi = j_in.min(j_out);
    let mut total = 0.0;
    for p in p_lo..=p_hi {
        let q = j_out - p;
        let (ln_c, neg_c) = signed_pow(c, p + k_in - q);
        let (ln_s, neg_s) = signed_pow(s, j_in - p + q);
        let magnitude =
            (norm + ln_binomial(j_in, p) + ln_binomial(k_in, q) + ln_c + ln_s).exp();
        let negative = ((j_in - p) % 2 == 1) ^ neg_c ^ neg_s;
        total += if negative { -magnitude } else { magnitude };
    }
    Ok(Complex64::from_polar(total, -setting.phi * k_in as f64))
}

/// Matrix of the basis change on the `n`-photon sector of one beam.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl TransformMatrix {
    pub fn identity(n: usize) -> Self {
        let dim = n + 1;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for d in 0..dim {
            entries[d * dim + d] = Complex64::new(1.0, 0.0);
        }
        Self { n, entries }
    }

    /// Total photon number of the sector.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// `M[j_out][j_in]`.
    #[inline]
    pub fn get(&self, j_out: usize, j_in: usize) -> Complex64 {
        self.entries[j_out * (self.n + 1) + j_in]
    }

    /// Column `j_in`: the image of `|j_in, n - j_in>`.
    pub fn column(&self, j_in: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|j_out| self.get(j_out, j_in)).collect()
    }

    pub fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(amps.len(), self.dim(), "amplitude vector has wrong length");
        let dim = self.dim();
        (0..dim)
            .map(|r| {
                self.entries[r * dim..(r + 1) * dim]
                    .iter()
                    .zip(amps)
                    .map(|(m, a)| m * a)
                    .sum()
            })
            .collect()
    }

    /// `max |(M M^dag - I)_{rc}|`.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += self.get(r, k) * self.get(c, k).conj();
                }
                if r == c {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Next sector up, from the symmetric-subspace embedding
    /// `|j, n-j> = sqrt(j/n) |j-1, n-j>|H> + sqrt((n-j)/n) |j, n-j-1>|V>`
    /// on both sides. Every step is an isometry followed by a co-isometry,
    /// so rounding errors add rather than amplify.
    fn raise(&self, u: &[[Complex64; 2]; 2]) -> Self {
        let n = self.n + 1;
        let dim = n + 1;
        let nf = n as f64;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for j_out in 0..dim {
            let w_first = (j_out as f64 / nf).sqrt();
            let w_second = ((n - j_out) as f64 / nf).sqrt();
            for j_in in 0..dim {
                let v_h = (j_in as f64 / nf).sqrt();
                let v_v = ((n - j_in) as f64 / nf).sqrt();
                let mut acc = Complex64::new(0.0, 0.0);
                if j_in > 0 {
                    if j_out > 0 {
                        acc += self.get(j_out - 1, j_in - 1) * u[0][0] * (v_h * w_first);
                    }
                    if j_out < n {
                        acc += self.get(j_out, j_in - 1) * u[1][0] * (v_h * w_second);
                    }
                }
                if j_in < n {
                    if j_out > 0 {
                        acc += self.get(j_out - 1, j_in) * u[0][1] * (v_v * w_first);
                    }
                    if j_out < n {
                        acc += self.get(j_out, j_in) * u[1][1] * (v_v * w_second);
                    }
                }
                entries[j_out * dim + j_in] = acc;
            }
        }
        Self { n, entries }
    }
}

type Ladder = Vec<Arc<TransformMatrix>>;

fn cache() -> &'static Mutex<HashMap<(u64, u64), Ladder>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Ladder>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn with_ladder<T>(
    n_max: usize,
    setting: PolarizationSetting,
    read: impl FnOnce(&[Arc<TransformMatrix>]) -> T,
) -> T {
    let mut guard = cache().lock().expect("transform cache poisoned");
    let ladder = guard
        .entry(setting.cache_key())
        .or_insert_with(|| vec![Arc::new(TransformMatrix::identity(0))]);
    if ladder.len() <= n_max {
        let u = setting.single_photon();
        while ladder.len() <= n_max {
            let next = if setting.theta == 0.0 && setting.phi == 0.0 {
                TransformMatrix::identity(ladder.len())
            } else {
                ladder.last().expect("ladder starts at n = 0").raise(&u)
            };
            ladder.push(Arc::new(next));
        }
    }
    read(&ladder[..=n_max])
}

/// Transforms for every sector `0..=n_max`, built by recursion and cached per setting.
pub fn transform_ladder(n_max: usize, setting: PolarizationSetting) -> Vec<Arc<TransformMatrix>> {
    with_ladder(n_max, setting, <[_]>::to_vec)
}

/// Transform for the `n`-photon sector.
pub fn build_transform(n: usize, setting: PolarizationSetting) -> Arc<TransformMatrix> {
    with_ladder(n, setting, |l| Arc::clone(&l[n]))
}
