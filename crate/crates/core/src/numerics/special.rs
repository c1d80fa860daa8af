//! Small scalar helpers shared by the spectral and rate code.

/// `x - log(1 + x)` without cancellation for small `x`.
pub fn x_minus_log1p(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // alternating series x^2/2 - x^3/3 + ...
        let mut term = x * x;
        let mut sum = 0.0;
        for k in 2..14 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term / k as f64;
            term *= x;
        }
        sum
    } else {
        x - x.ln_1p()
    }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `10 log10(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `10^(x/10)`.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
