//! Canonical cutoff χ₀: even, equal to 1 on [−1/2, 1/2], vanishing outside (−1, 1),
//! built from the smooth step S(s) = φ(s)/(φ(s)+φ(1−s)) with φ(s) = e^{−1/s}.

/// Smooth step S on [0, 1]; 0 below, 1 above.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        // φ(1−s)/φ(s) = exp(1/s − 1/(1−s))
        let e = 1.0 / s - 1.0 / (1.0 - s);
        if e > 700.0 {
            0.0
        } else {
            1.0 / (1.0 + e.exp())
        }
    }
}

/// dS/ds.
pub fn smooth_step_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let v = smooth_step(s);
    v * (1.0 - v) * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)))
}

/// χ₀(t) = 1 − S(2|t| − 1).
pub fn mollifier_eval(t: f64) -> f64 {
    1.0 - smooth_step(2.0 * t.abs() - 1.0)
}

/// χ₀′(t).
pub fn mollifier_derivative(t: f64) -> f64 {
    let d = -2.0 * smooth_step_derivative(2.0 * t.abs() - 1.0);
    if t < 0.0 {
        -d
    } else {
        d
    }
}
