//! Two-photon polarization states and the Bell-state analyzer model.
//!
//! A symmetric beamsplitter feeds two polarization analyzers; the coincidence
//! signature at the four outputs partially discriminates the Bell states. The
//! polarization-correlation parameter derived from those signatures is the
//! seal's tamper witness: it exceeds 1/2 only for Ψ-like entangled,
//! temporally indistinguishable pairs.

use num_complex::Complex64;

/// Normalization tolerance for state construction.
const NORM_TOL: f64 = 1e-9;

/// Validation failures for photonic inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonicsError {
    /// Amplitudes do not lie on the unit sphere (holds the squared norm).
    NotNormalized(f64),
    /// Non-positive walk-off window.
    InvalidWalkOff(f64),
}

impl core::fmt::Display for PhotonicsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NotNormalized(n2) => {
                write!(f, "state not normalized: |amplitudes|^2 = {n2}")
            }
            Self::InvalidWalkOff(dt) => write!(f, "walk-off window must be > 0, got {dt}"),
        }
    }
}

/// Pure two-photon polarization state with amplitudes over
/// {|H0 H1>, |H0 V1>, |V0 H1>, |V0 V1>}.
///
/// Construction enforces normalization, so every operation downstream can
/// assume a unit state. States differing by a global phase are physically
/// identical; only bilinear combinations of the amplitudes are observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl TwoPhotonState {
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, PhotonicsError> {
        let n2 = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
        if libm::fabs(n2 - 1.0) > NORM_TOL {
            return Err(PhotonicsError::NotNormalized(n2));
        }
        Ok(Self { a, b, c, d })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self, PhotonicsError> {
        Self::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
    }
}

/// The four maximally entangled polarization Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl From<BellState> for TwoPhotonState {
    fn from(bell: BellState) -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let p = Complex64::new(s, 0.0);
        let m = Complex64::new(-s, 0.0);
        match bell {
            BellState::PsiPlus => Self { a: z, b: p, c: p, d: z },
            BellState::PsiMinus => Self { a: z, b: p, c: m, d: z },
            BellState::PhiPlus => Self { a: p, b: z, c: z, d: p },
            BellState::PhiMinus => Self { a: p, b: z, c: z, d: m },
        }
    }
}

/// The ten two-photon detection pathways resolved by the analyzer.
///
/// Naming follows output port (2 or 3) and polarization (h or v); e.g.
/// `H2V3` is an h click on port 2 coincident with a v click on port 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pathway {
    H2H3,
    V2V3,
    H2H2,
    H3H3,
    V2V2,
    V3V3,
    H2V2,
    H3V3,
    H2V3,
    V2H3,
}

impl Pathway {
    pub const ALL: [Pathway; 10] = [
        Pathway::H2H3,
        Pathway::V2V3,
        Pathway::H2H2,
        Pathway::H3H3,
        Pathway::V2V2,
        Pathway::V3V3,
        Pathway::H2V2,
        Pathway::H3V3,
        Pathway::H2V3,
        Pathway::V2H3,
    ];

    /// The eight pathways the monitor actually counts. Same-port
    /// same-polarization coincidences are observed in one arm only, so
    /// `H3H3` and `V3V3` never contribute corrected counts.
    pub const MONITORED: [Pathway; 8] = [
        Pathway::H2H3,
        Pathway::V2V3,
        Pathway::H2H2,
        Pathway::V2V2,
        Pathway::H2V2,
        Pathway::H3V3,
        Pathway::H2V3,
        Pathway::V2H3,
    ];

    pub fn index(self) -> usize {
        Pathway::ALL.iter().position(|&p| p == self).unwrap()
    }

    pub fn label(self) -> &'static str {
        match self {
            Pathway::H2H3 => "h2h3",
            Pathway::V2V3 => "v2v3",
            Pathway::H2H2 => "h2h2",
            Pathway::H3H3 => "h3h3",
            Pathway::V2V2 => "v2v2",
            Pathway::V3V3 => "v3v3",
            Pathway::H2V2 => "h2v2",
            Pathway::H3V3 => "h3v3",
            Pathway::H2V3 => "h2v3",
            Pathway::V2H3 => "v2h3",
        }
    }

    pub fn from_label(s: &str) -> Option<Pathway> {
        Pathway::ALL.iter().copied().find(|p| p.label() == s)
    }
}

/// Coincidence-type probabilities plus their split over the ten pathways.
///
/// `p_ss + p_sd + p_ds + p_dd = 1`; each aggregate is the sum of its pathway
/// group (the per-pathway split is symmetric only for symmetric states, e.g.
/// |a| = |d| splits `p_ss` as 1/4 per pathway).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceProbabilities {
    pub p_ss: f64,
    pub p_sd: f64,
    pub p_ds: f64,
    pub p_dd: f64,
    pathway: [f64; 10],
}

impl CoincidenceProbabilities {
    /// Build from a full pathway map; the aggregates are derived sums.
    pub fn from_pathways(pathway: [f64; 10]) -> Self {
        let p = |pw: Pathway| pathway[pw.index()];
        Self {
            p_sd: p(Pathway::H2H3) + p(Pathway::V2V3),
            p_ss: p(Pathway::H2H2) + p(Pathway::H3H3) + p(Pathway::V2V2) + p(Pathway::V3V3),
            p_ds: p(Pathway::H2V2) + p(Pathway::H3V3),
            p_dd: p(Pathway::H2V3) + p(Pathway::V2H3),
            pathway,
        }
    }

    pub fn pathway(&self, pw: Pathway) -> f64 {
        self.pathway[pw.index()]
    }

    pub fn pathways(&self) -> &[f64; 10] {
        &self.pathway
    }

    pub fn total(&self) -> f64 {
        self.p_ss + self.p_sd + self.p_ds + self.p_dd
    }

    /// Convex combination of two probability sets.
    pub fn mix(&self, other: &Self, w_self: f64) -> Self {
        let w_other = 1.0 - w_self;
        let mut pathway = [0.0; 10];
        for i in 0..10 {
            pathway[i] = w_self * self.pathway[i] + w_other * other.pathway[i];
        }
        Self::from_pathways(pathway)
    }
}

/// Relative-delay model for the two photons at the beamsplitter.
///
/// `t_d` is the active-minus-reference arrival delay; `delta_t` is the
/// ordinary/extraordinary walk-off across the full crystal, which sets the
/// width of the two-photon interference envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalModel {
    pub t_d: f64,
    pub delta_t: f64,
}

impl TemporalModel {
    pub fn new(t_d: f64, delta_t: f64) -> Result<Self, PhotonicsError> {
        if !(delta_t > 0.0) {
            return Err(PhotonicsError::InvalidWalkOff(delta_t));
        }
        Ok(Self { t_d, delta_t })
    }

    /// Interference envelope at the configured delay.
    pub fn envelope(&self) -> f64 {
        triangle(2.0 * self.t_d / self.delta_t)
    }
}

/// Unit triangle function: 1 - |x| inside [-1, 1], zero outside.
pub fn triangle(x: f64) -> f64 {
    let ax = libm::fabs(x);
    if ax <= 1.0 {
        1.0 - ax
    } else {
        0.0
    }
}

/// Detection probabilities of the Bell-state analyzer for a pure,
/// temporally indistinguishable input state.
pub fn bsa_probabilities(state: &TwoPhotonState) -> CoincidenceProbabilities {
    let (a, b, c, d) = (state.a, state.b, state.c, state.d);
    let interference = 2.0 * (b.conj() * c).re; // b*c + b c*
    let bc2 = b.norm_sqr() + c.norm_sqr();
    let mut pathway = [0.0; 10];
    pathway[Pathway::H2H2.index()] = a.norm_sqr() / 2.0;
    pathway[Pathway::H3H3.index()] = a.norm_sqr() / 2.0;
    pathway[Pathway::V2V2.index()] = d.norm_sqr() / 2.0;
    pathway[Pathway::V3V3.index()] = d.norm_sqr() / 2.0;
    pathway[Pathway::H2V3.index()] = (bc2 + interference) / 4.0;
    pathway[Pathway::V2H3.index()] = (bc2 + interference) / 4.0;
    pathway[Pathway::H2V2.index()] = (bc2 - interference) / 4.0;
    pathway[Pathway::H3V3.index()] = (bc2 - interference) / 4.0;
    // A pure input of this form produces no same-polarization different-port
    // coincidences; those arise only as noise in measured data.
    pathway[Pathway::H2H3.index()] = 0.0;
    pathway[Pathway::V2V3.index()] = 0.0;
    CoincidenceProbabilities::from_pathways(pathway)
}

/// Polarization-correlation parameter E = p_dd - p_ds = b*c + b c*.
///
/// Positive when orthogonal polarizations exit different ports; bounded by
/// 1/2 in magnitude for every separable state.
pub fn correlation(state: &TwoPhotonState) -> f64 {
    // normalized by <psi|psi> so the Bell states land on +-1 and 0 exactly
    // despite the 1/sqrt(2) amplitudes not squaring to 1/2 in binary
    let norm = state.a.norm_sqr() + state.b.norm_sqr() + state.c.norm_sqr() + state.d.norm_sqr();
    2.0 * (state.b.conj() * state.c).re / norm
}

/// Product state of two independently polarized photons.
///
/// Its correlation is sin(2α) sin(2β) cos(A-B) / 2, which saturates the
/// separable bound of 1/2 at α = β = π/4, A = B.
pub fn separable_state(alpha: f64, beta: f64, phase_a: f64, phase_b: f64) -> TwoPhotonState {
    let (sa, ca) = (libm::sin(alpha), libm::cos(alpha));
    let (sb, cb) = (libm::sin(beta), libm::cos(beta));
    let ea = Complex64::new(libm::cos(phase_a), libm::sin(phase_a));
    let eb = Complex64::new(libm::cos(phase_b), libm::sin(phase_b));
    TwoPhotonState {
        a: Complex64::new(ca * cb, 0.0),
        b: eb * (ca * sb),
        c: ea * (sa * cb),
        d: ea * eb * (sa * sb),
    }
}

/// Correlation of a multi-mode state: the monochromatic correlation scaled by
/// the triangular interference envelope from the relative delay.
pub fn multimode_correlation(state: &TwoPhotonState, temporal: &TemporalModel) -> f64 {
    temporal.envelope() * correlation(state)
}

/// Detection probabilities for an ideal Ψ-like source at relative phase
/// `phi` and the given temporal model.
///
/// At phi = π (Ψ+) and t_d = 0 all coincidences are different-polarization,
/// different-port; phi = 0 gives Ψ- and flips the sign. The correlation of
/// the returned probabilities is Λ(2 t_d / Δt) · cos(phi + π).
pub fn multimode_probabilities(phi: f64, temporal: &TemporalModel) -> CoincidenceProbabilities {
    let e = temporal.envelope() * libm::cos(phi + core::f64::consts::PI);
    let p_dd = 0.5 * (1.0 + e);
    let p_ds = 0.5 * (1.0 - e);
    let mut pathway = [0.0; 10];
    pathway[Pathway::H2V3.index()] = p_dd / 2.0;
    pathway[Pathway::V2H3.index()] = p_dd / 2.0;
    pathway[Pathway::H2V2.index()] = p_ds / 2.0;
    pathway[Pathway::H3V3.index()] = p_ds / 2.0;
    CoincidenceProbabilities::from_pathways(pathway)
}

/// Overlap of the input with the Ψ+ and Ψ- Bell states:
/// (|b+c|²/2, |b-c|²/2), equal to the different-polarization coincidence
/// probabilities grouped by port signature.
pub fn bell_overlap(state: &TwoPhotonState) -> (f64, f64) {
    let plus = (state.b + state.c).norm_sqr() / 2.0;
    let minus = (state.b - state.c).norm_sqr() / 2.0;
    (plus, minus)
}
