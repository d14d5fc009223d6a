//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree selection follows Higham (2005): the lowest of the degrees
//! 3, 5, 7, 9 whose backward-error bound θ_m covers ‖A‖₁ is used directly;
//! otherwise A is scaled by 2⁻ˢ so that ‖A/2ˢ‖₁ ≤ θ₁₃, the degree-13
//! approximant is formed and the result squared s times. Slice Lindbladians
//! are non-normal, so no eigendecomposition shortcut is taken.

use crate::linalg::{c, CMatrix};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// exp(A) for a square complex matrix.
///
/// # Panics
/// If `a` is not square.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if n == 1 {
        return CMatrix::from_element(1, 1, a[(0, 0)].exp());
    }

    let norm = one_norm(a);
    if !norm.is_finite() {
        return CMatrix::from_element(n, n, c(f64::NAN));
    }
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, coeffs);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * c(2f64.powi(-s));
    let mut result = pade13(&scaled);
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Degrees 3..9: U = A Σ b_odd A^(j-1), V = Σ b_even A^j.
fn pade_low(a: &CMatrix, b: &[f64]) -> CMatrix {
    let n = a.nrows();
    let eye = CMatrix::identity(n, n);
    let a2 = a * a;
    let mut u_inner = &eye * c(b[1]);
    let mut v = &eye * c(b[0]);
    let mut power = eye.clone();
    let half = (b.len() - 1) / 2;
    for k in 1..=half {
        power = &power * &a2;
        u_inner += &power * c(b[2 * k + 1]);
        v += &power * c(b[2 * k]);
    }
    let u = a * u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let eye = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &B13;

    let w1 = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let w2 = &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + &eye * c(b[1]);
    let u = a * (&a6 * w1 + w2);

    let z1 = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let z2 = &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + &eye * c(b[0]);
    let v = &a6 * z1 + z2;
    solve_pade(&u, &v)
}

/// (V − U)⁻¹ (V + U)
fn solve_pade(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let numerator = v + u;
    let denominator = v - u;
    denominator
        .lu()
        .solve(&numerator)
        .unwrap_or_else(|| CMatrix::from_element(u.nrows(), u.ncols(), c(f64::NAN)))
}
