//! GDoF-level SINR exponents of the SLS schemes under successive decoding.
//!
//! The scheme is described as data: each layer's power exponent and carrying
//! antennas, the attenuated antenna, and every receiver's decoding order.
//! The exponent of a layer at a receiver is
//! `max(0, min(s, s - I_1, s - I_2, s - I_3))`, where `s` is the layer's
//! strength through the receiver's own antenna and `I_m` is the strongest
//! not-yet-decoded interferer arriving through antenna `m`.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::rational::{format_rational, int, Rational, Q};
use crate::regions::Variant;

use super::affine::{a, Affine, GAMMA_P, LAMBDA, LAMBDA_P};
use super::{q, require_three, SlsError, SlsParams, SlsScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    X123,
    X12,
    X1,
    X2,
    X3,
}

impl Layer {
    pub const ALL: [Layer; 5] = [Layer::X123, Layer::X12, Layer::X1, Layer::X2, Layer::X3];

    /// Power exponent below unit power, as (level, affine form); the level
    /// orders the layers by power since all parameters are nonnegative.
    fn power(self) -> (u8, Affine) {
        match self {
            Layer::X123 => (0, Affine::ZERO),
            Layer::X12 | Layer::X3 => (1, LAMBDA),
            Layer::X1 | Layer::X2 => (2, LAMBDA + LAMBDA_P),
        }
    }

    pub fn antennas(self) -> &'static [usize] {
        match self {
            Layer::X123 => &[0, 1, 2],
            Layer::X12 => &[0, 1],
            Layer::X1 => &[0],
            Layer::X2 => &[1],
            Layer::X3 => &[2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::X123 => "X123",
            Layer::X12 => "X12",
            Layer::X1 => "X1",
            Layer::X2 => "X2",
            Layer::X3 => "X3",
        }
    }
}

pub fn decoding_order(receiver: usize) -> &'static [Layer] {
    match receiver {
        0 => &[Layer::X123, Layer::X12, Layer::X1],
        1 => &[Layer::X123, Layer::X12, Layer::X2],
        _ => &[Layer::X123, Layer::X3],
    }
}

pub fn attenuated_antenna(variant: Variant) -> usize {
    match variant {
        Variant::D => 0,
        Variant::F => 1,
    }
}

fn attenuation(variant: Variant, m: usize) -> Affine {
    if m == attenuated_antenna(variant) {
        GAMMA_P
    } else {
        Affine::ZERO
    }
}

/// Received strength exponent of `layer` at `rx` through antenna `m`.
fn strength(variant: Variant, rx: usize, m: usize, layer: Layer) -> Affine {
    a(rx, m) - attenuation(variant, m) - layer.power().1
}

/// The affine branches whose minimum (floored at 0) is the exponent.
pub fn exponent_branches(variant: Variant, rx: usize, layer: Layer) -> Vec<Affine> {
    let order = decoding_order(rx);
    let pos = order.iter().position(|&l| l == layer).expect("layer decoded at this receiver");
    let s = strength(variant, rx, rx, layer);
    let mut out = vec![s];
    for m in 0..3 {
        let strongest = Layer::ALL
            .iter()
            .filter(|&&l| l != layer && !order[..pos].contains(&l) && l.antennas().contains(&m))
            .min_by_key(|l| l.power().0);
        if let Some(&l) = strongest {
            out.push(s - strength(variant, rx, m, l));
        }
    }
    out.dedup();
    out
}

pub fn load_of(split: &super::RateSplit, layer: Layer) -> Rational {
    match layer {
        Layer::X123 => split.d_all.clone(),
        Layer::X12 => split.d_pair.clone(),
        Layer::X1 => split.d_single[0].clone(),
        Layer::X2 => split.d_single[1].clone(),
        Layer::X3 => split.d_single[2].clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinrEntry {
    /// 1-based receiver index.
    pub receiver: usize,
    pub layer: Layer,
    pub expression: String,
    pub exponent: Q,
    pub load: Q,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinrReport {
    pub entries: Vec<SinrEntry>,
    pub feasible: bool,
}

pub fn exponent(ch: &ChannelMatrix, variant: Variant, p: &SlsParams, rx: usize, layer: Layer) -> Rational {
    let raw = exponent_branches(variant, rx, layer)
        .iter()
        .map(|b| b.eval(ch, p))
        .min()
        .expect("at least the signal branch");
    raw.max(int(0))
}

pub fn sinr_exponents(s: &SlsScheme) -> Result<SinrReport, SlsError> {
    require_three(&s.channel)?;
    s.split.induced()?;
    let mut entries = Vec::new();
    for rx in 0..3 {
        for &layer in decoding_order(rx) {
            let branches = exponent_branches(s.variant, rx, layer);
            let expression = format!(
                "max(0, min({}))",
                branches.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
            );
            let e = exponent(&s.channel, s.variant, &s.params, rx, layer);
            let load = load_of(&s.split, layer);
            entries.push(SinrEntry {
                receiver: rx + 1,
                layer,
                expression,
                ok: load <= e,
                exponent: q(&e),
                load: q(&load),
            });
        }
    }
    let feasible = entries.iter().all(|e| e.ok);
    Ok(SinrReport { entries, feasible })
}

impl SinrReport {
    pub fn table(&self) -> String {
        let mut out = String::from("rx  layer  load     exponent  ok\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{:<3} {:<6} {:<8} {:<9} {}\n",
                e.receiver,
                e.layer.name(),
                format_rational(&e.load.0),
                format_rational(&e.exponent.0),
                if e.ok { "yes" } else { "NO" }
            ));
        }
        out
    }
}
