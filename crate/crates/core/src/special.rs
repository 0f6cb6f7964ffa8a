//! Gamma function and sine integral.

use num_complex::Complex;

use crate::scalar::{count, lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler gamma function (Lanczos approximation, reflection for `x < 1/2`).
pub fn gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        return T::PI() / ((T::PI() * x).sin() * gamma(T::one() - x));
    }
    let z = x - T::one();
    let mut acc = lit::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (z + count(i));
    }
    let t = z + lit::<T>(LANCZOS_G) + half;
    (lit::<T>(2.0) * T::PI()).sqrt() * t.powf(z + half) * (-t).exp() * acc
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`.
pub fn sine_integral<T: Real>(x: T) -> T {
    let t = x.abs();
    if t.is_zero() {
        return T::zero();
    }
    let eps = T::epsilon();
    let value = if t < lit(2.0) {
        // Power series: sum (-1)^k t^(2k+1) / ((2k+1) (2k+1)!).
        let mut term = t;
        let mut sum = t;
        let t2 = t * t;
        for k in 1..60 {
            let n = count::<T>(2 * k);
            term = -term * t2 / (n * (n + T::one()));
            let add = term / (n + T::one());
            sum = sum + add;
            if add.abs() < eps * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // Lentz continued fraction for E1(i t).
        let tiny = T::min_positive_value() / eps;
        let one = Complex::new(T::one(), T::zero());
        let mut b = Complex::new(T::one(), t);
        let mut c = Complex::new(T::one() / tiny, T::zero());
        let mut d = one / b;
        let mut h = d;
        for i in 2..500usize {
            let a = -count::<T>((i - 1) * (i - 1));
            b = b + Complex::new(lit(2.0), T::zero());
            d = one / (d * a + b);
            c = b + one * a / c;
            let del = c * d;
            h = h * del;
            if (del.re - T::one()).abs() + del.im.abs() < lit::<T>(4.0) * eps {
                break;
            }
        }
        h = Complex::new(t.cos(), -t.sin()) * h;
        T::FRAC_PI_2() + h.im
    };
    if x < T::zero() {
        -value
    } else {
        value
    }
}
