//! Machine description: grid bounds, AOD line counts, physical parameters
//! and the discretization constants derived from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Physical constants of the machine.
///
/// Lengths are µm, times µs unless noted. `f2q` is the per-gate two-qubit
/// fidelity; `t_coh_s` the qubit coherence time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Rydberg blockade radius: pairs closer than this entangle when the
    /// plane-wide laser fires.
    pub r_b_um: f64,
    /// Minimum separation between two rows (or columns) of the same array.
    pub d_s_um: f64,
    /// Movement-time constant: a move over distance D takes
    /// `t0 * sqrt(D / d0)`.
    pub t0_us: f64,
    pub d0_um: f64,
    pub f2q: f64,
    pub t_coh_s: f64,
    /// Per activate/deactivate overhead.
    pub transfer_us: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            r_b_um: 7.5,
            d_s_um: 2.0,
            t0_us: 200.0,
            d0_um: 110.0,
            f2q: 0.995,
            t_coh_s: 1.5,
            transfer_us: 0.0,
        }
    }
}

/// Factor by which interaction sites must outdistance the blockade radius to
/// suppress stray interactions.
pub const SITE_CLEARANCE: f64 = 2.5;

/// Architecture specification: interaction-site grid `X x Y`, up to `C` AOD
/// columns and `R` rows, stacking factors, site pitch and physical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchSpec {
    pub x: u32,
    pub y: u32,
    pub c: u32,
    pub r: u32,
    pub r_stk: u32,
    pub c_stk: u32,
    pub site_pitch_um: f64,
    pub phys: PhysicalParams,
    pub transfers_allowed: bool,
}

/// On-disk architecture document. Omitted pitch and stacking factors are
/// derived from the physical parameters.
#[derive(Debug, Serialize, Deserialize)]
pub struct ArchDoc {
    pub x: u32,
    pub y: u32,
    pub c: u32,
    pub r: u32,
    pub rb_um: f64,
    pub ds_um: f64,
    pub t0_us: f64,
    pub d0_um: f64,
    pub f2q: f64,
    pub tcoh_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_stk: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_stk: Option<u32>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub transfer_us: f64,
    pub transfers: bool,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("architecture document: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid architecture: {0:?}")]
    Invalid(Vec<String>),
}

/// Largest symmetric stacking factor: the most rows (and columns) that may
/// converge on one site while the extreme corner pair stays within the
/// blockade radius, i.e. the largest k with `2 (k-1)^2 d_s^2 <= r_b^2`.
pub fn derive_stacking(phys: &PhysicalParams) -> (u32, u32) {
    let k = 1 + (phys.r_b_um / (phys.d_s_um * std::f64::consts::SQRT_2)).floor() as u32;
    (k, k)
}

/// Default site pitch: far enough apart that atoms at different sites stay
/// beyond `2.5 r_b` even at worst-case intra-site offsets, rounded up to a
/// whole µm.
pub fn derive_pitch(phys: &PhysicalParams, r_stk: u32, c_stk: u32) -> f64 {
    let k = r_stk.max(c_stk) as f64;
    (SITE_CLEARANCE * phys.r_b_um + 2.0 * (k - 1.0) * phys.d_s_um).ceil()
}

impl Default for ArchSpec {
    fn default() -> Self {
        let phys = PhysicalParams::default();
        let (r_stk, c_stk) = derive_stacking(&phys);
        let site_pitch_um = derive_pitch(&phys, r_stk, c_stk);
        ArchSpec {
            x: 16,
            y: 16,
            c: 16,
            r: 16,
            r_stk,
            c_stk,
            site_pitch_um,
            phys,
            transfers_allowed: true,
        }
    }
}

impl ArchSpec {
    pub fn from_json(text: &str) -> Result<Self, ArchError> {
        let doc: ArchDoc = serde_json::from_str(text)?;
        let phys = PhysicalParams {
            r_b_um: doc.rb_um,
            d_s_um: doc.ds_um,
            t0_us: doc.t0_us,
            d0_um: doc.d0_um,
            f2q: doc.f2q,
            t_coh_s: doc.tcoh_s,
            transfer_us: doc.transfer_us,
        };
        let (dr, dc) = derive_stacking(&phys);
        let r_stk = doc.r_stk.unwrap_or(dr);
        let c_stk = doc.c_stk.unwrap_or(dc);
        let spec = ArchSpec {
            x: doc.x,
            y: doc.y,
            c: doc.c,
            r: doc.r,
            r_stk,
            c_stk,
            site_pitch_um: doc.pitch_um.unwrap_or_else(|| derive_pitch(&phys, r_stk, c_stk)),
            phys,
            transfers_allowed: doc.transfers,
        };
        let violations = spec.validate();
        if violations.is_empty() {
            Ok(spec)
        } else {
            Err(ArchError::Invalid(violations))
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ArchDoc {
            x: self.x,
            y: self.y,
            c: self.c,
            r: self.r,
            rb_um: self.phys.r_b_um,
            ds_um: self.phys.d_s_um,
            t0_us: self.phys.t0_us,
            d0_um: self.phys.d0_um,
            f2q: self.phys.f2q,
            tcoh_s: self.phys.t_coh_s,
            pitch_um: Some(self.site_pitch_um),
            r_stk: Some(self.r_stk),
            c_stk: Some(self.c_stk),
            transfer_us: self.phys.transfer_us,
            transfers: self.transfers_allowed,
        };
        serde_json::to_string_pretty(&doc).expect("arch serializes")
    }

    /// Checks every invariant; all violations found are returned as data.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let p = &self.phys;
        if self.x == 0 || self.y == 0 {
            out.push("empty grid: X and Y must be at least 1".into());
        }
        if self.c == 0 || self.r == 0 {
            out.push("no AOD lines: C and R must be at least 1".into());
        }
        if self.r_stk == 0 || self.c_stk == 0 {
            out.push("stacking factors must be at least 1".into());
        }
        for (name, v) in [
            ("rb_um", p.r_b_um),
            ("ds_um", p.d_s_um),
            ("t0_us", p.t0_us),
            ("d0_um", p.d0_um),
            ("tcoh_s", p.t_coh_s),
        ] {
            if !(v > 0.0) {
                out.push(format!("{name} must be strictly positive"));
            }
        }
        if !(p.f2q > 0.0 && p.f2q <= 1.0) {
            out.push("f2q must lie in (0, 1]".into());
        }
        if p.transfer_us < 0.0 {
            out.push("transfer_us must be non-negative".into());
        }
        if self.r_stk >= 1 && self.c_stk >= 1 {
            let lhs = (((self.r_stk - 1).pow(2) + (self.c_stk - 1).pow(2)) as f64)
                * p.d_s_um
                * p.d_s_um;
            if lhs > p.r_b_um * p.r_b_um + 1e-9 {
                out.push(format!(
                    "stacking inequality violated: [(R_STK-1)^2+(C_STK-1)^2] d_s^2 = {lhs} > r_b^2"
                ));
            }
        }
        let needed = SITE_CLEARANCE * p.r_b_um
            + 2.0 * (self.r_stk.max(self.c_stk).saturating_sub(1)) as f64 * p.d_s_um;
        if self.site_pitch_um + 1e-9 < needed {
            out.push(format!(
                "site pitch {} um too small: needs at least {} um to keep cross-site \
                 atoms beyond {} r_b",
                self.site_pitch_um, needed, SITE_CLEARANCE
            ));
        }
        out
    }
}
