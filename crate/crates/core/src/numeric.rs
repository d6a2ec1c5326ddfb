//! Small numeric helpers shared across modules.

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn accurate_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

pub fn accurate_dot(a: &[f64], b: &[f64]) -> f64 {
    accurate_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub fn norm2(v: &[f64]) -> f64 {
    accurate_dot(v, v).sqrt()
}

/// `(sum |v_i|^p)^(1/p)`.
pub fn norm_p(v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return norm2(v);
    }
    let scale = norm_inf(v);
    if scale == 0.0 {
        return 0.0;
    }
    scale * accurate_sum(v.iter().map(|x| (x.abs() / scale).powf(p))).powf(1.0 / p)
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Scales `v` to unit `p`-norm; returns `None` for a zero vector.
pub fn normalized_p(v: &[f64], p: f64) -> Option<Vec<f64>> {
    let n = norm_p(v, p);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(v.iter().map(|x| x / n).collect())
}

pub fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    normalized_p(v, 2.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Entrywise `x^k`, keeping the sign for odd `k`.
pub fn entrywise_pow(v: &[f64], k: usize) -> Vec<f64> {
    v.iter().map(|x| x.powi(k as i32)).collect()
}

/// Flips `v` so that its largest-magnitude component is positive (first one
/// on ties within 1e-12).
pub(crate) fn sign_canonical(v: &mut [f64]) -> bool {
    let m = norm_inf(v);
    let pivot = v.iter().position(|x| (x.abs() - m).abs() <= 1e-12 * m.max(1.0));
    match pivot {
        Some(i) if v[i] < 0.0 => {
            v.iter_mut().for_each(|x| *x = -*x);
            true
        }
        _ => false,
    }
}
