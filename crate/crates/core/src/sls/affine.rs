//! Integer-coefficient affine forms in the channel strengths and the four
//! power-control parameters.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::channel::ChannelMatrix;
use crate::rational::{int, Rational};

use super::SlsParams;

/// `sum p[i] * param_i + sum a[k][m] * alpha_km`, parameters ordered
/// `(lambda, lambda', gamma, gamma')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub p: [i32; 4],
    pub a: [[i32; 3]; 3],
}

pub const LAMBDA: Affine = Affine::param(0);
pub const LAMBDA_P: Affine = Affine::param(1);
pub const GAMMA: Affine = Affine::param(2);
pub const GAMMA_P: Affine = Affine::param(3);

pub const fn a(k: usize, m: usize) -> Affine {
    let mut out = Affine::ZERO;
    out.a[k][m] = 1;
    out
}

const PARAM_NAMES: [&str; 4] = ["lambda", "lambda'", "gamma", "gamma'"];

impl Affine {
    pub const ZERO: Affine = Affine {
        p: [0; 4],
        a: [[0; 3]; 3],
    };

    pub const fn param(i: usize) -> Affine {
        let mut out = Affine::ZERO;
        out.p[i] = 1;
        out
    }

    pub fn param_coeffs(&self) -> [i32; 4] {
        self.p
    }

    pub fn alpha_part(&self, ch: &ChannelMatrix) -> Rational {
        let mut s = int(0);
        for k in 0..3 {
            for m in 0..3 {
                if self.a[k][m] != 0 {
                    s += ch.alpha(k, m) * int(self.a[k][m] as i64);
                }
            }
        }
        s
    }

    pub fn eval(&self, ch: &ChannelMatrix, p: &SlsParams) -> Rational {
        let mut s = self.alpha_part(ch);
        for (c, v) in self.p.iter().zip(p.as_array()) {
            if *c != 0 {
                s += v * int(*c as i64);
            }
        }
        s
    }
}

impl Add for Affine {
    type Output = Affine;
    fn add(mut self, o: Affine) -> Affine {
        for i in 0..4 {
            self.p[i] += o.p[i];
        }
        for k in 0..3 {
            for m in 0..3 {
                self.a[k][m] += o.a[k][m];
            }
        }
        self
    }
}

impl Neg for Affine {
    type Output = Affine;
    fn neg(mut self) -> Affine {
        self.p.iter_mut().for_each(|x| *x = -*x);
        self.a.iter_mut().flatten().for_each(|x| *x = -*x);
        self
    }
}

impl Sub for Affine {
    type Output = Affine;
    fn sub(self, o: Affine) -> Affine {
        self + (-o)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(i32, String)> = Vec::new();
        for k in 0..3 {
            for m in 0..3 {
                if self.a[k][m] != 0 {
                    terms.push((self.a[k][m], format!("alpha_{}{}", k + 1, m + 1)));
                }
            }
        }
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            if self.p[i] != 0 {
                terms.push((self.p[i], name.to_string()));
            }
        }
        terms.sort_by_key(|(c, _)| *c < 0);
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (c, name)) in terms.iter().enumerate() {
            let mag = c.abs();
            let body = if mag == 1 { name.clone() } else { format!("{mag}*{name}") };
            match (n, *c < 0) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}
