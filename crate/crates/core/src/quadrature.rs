//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.
//!
//! Used as the numerical reference for characteristic functions; nothing in
//! the closed-form paths calls it.

use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK.iter().take(7).enumerate() {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    ((kronrod * half), ((kronrod - gauss) * half).norm())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection. Gives up refining an interval narrower than `1e-14 (b - a)`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> C64 {
    let min_width = 1e-14 * (b - a).abs();
    let mut stack = vec![(a, b, tol)];
    let mut total = C64::new(0.0, 0.0);
    while let Some((lo, hi, t)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        if err <= t || (hi - lo).abs() < min_width {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t));
            stack.push((lo, mid, 0.5 * t));
        }
    }
    total
}
