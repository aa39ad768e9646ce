use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use vsbi_core::envelope::preset;
use vsbi_core::lti::DecayModel;
use vsbi_core::{build_envelope, Channel, ComplianceEnvelope, EnvelopeOptions, Preset, TimeDomainCriteria};

/// A preset name or a full set of explicit criteria.
#[derive(Debug, Clone, Args)]
pub struct CriteriaArgs {
    /// Built-in criteria: aemo-p, miso-p, ercot-p or ercot-q.
    #[arg(long, conflicts_with_all = ["channel", "rise_ms", "peak", "decay_ms"])]
    pub preset: Option<Preset>,
    /// Channel for explicit criteria: p-theta (default) or q-v.
    #[arg(long)]
    pub channel: Option<Channel>,
    /// Maximum 10-90 % rise time, ms.
    #[arg(long, required_unless_present = "preset")]
    pub rise_ms: Option<f64>,
    /// Minimum peak response, channel units.
    #[arg(long, required_unless_present = "preset")]
    pub peak: Option<f64>,
    /// Minimum decay time, ms. Omit for a low-pass-only envelope.
    #[arg(long)]
    pub decay_ms: Option<f64>,
    /// Damping ratio of both boundary filters.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Damping ratio of the low-pass boundary; overrides --zeta.
    #[arg(long)]
    pub zeta_lpf: Option<f64>,
    /// Damping ratio of the high-pass boundary; overrides --zeta.
    #[arg(long)]
    pub zeta_hpf: Option<f64>,
    /// Lower band edge of low-pass-only envelopes, Hz.
    #[arg(long, default_value_t = 1.0)]
    pub floor_hz: f64,
    /// How the high-pass natural frequency follows from the decay time.
    #[arg(long, value_enum, default_value = "analytic")]
    pub decay_model: DecayModelArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecayModelArg {
    Analytic,
    Empirical,
}

impl From<DecayModelArg> for DecayModel {
    fn from(m: DecayModelArg) -> Self {
        match m {
            DecayModelArg::Analytic => DecayModel::Analytic,
            DecayModelArg::Empirical => DecayModel::Empirical,
        }
    }
}

impl CriteriaArgs {
    pub fn resolve(&self) -> Result<(TimeDomainCriteria, EnvelopeOptions)> {
        let base = match self.preset {
            Some(p) => preset(p),
            None => {
                let (Some(rise), Some(peak)) = (self.rise_ms, self.peak) else {
                    bail!("explicit criteria need --rise-ms and --peak");
                };
                TimeDomainCriteria::new(
                    self.channel.unwrap_or(Channel::PTheta),
                    rise * 1e-3,
                    peak,
                    self.decay_ms.map(|d| d * 1e-3),
                )
            }
        };
        let zeta_lpf = self.zeta_lpf.or(self.zeta).unwrap_or(base.zeta_lpf);
        let zeta_hpf = self.zeta_hpf.or(self.zeta).unwrap_or(base.zeta_hpf);
        let criteria = base.with_zetas(zeta_lpf, zeta_hpf);
        criteria.validate()?;
        let options = EnvelopeOptions { lp_only_floor_hz: self.floor_hz, decay_model: self.decay_model.into() };
        Ok((criteria, options))
    }

    pub fn envelope(&self) -> Result<(TimeDomainCriteria, EnvelopeOptions, ComplianceEnvelope)> {
        let (criteria, options) = self.resolve()?;
        let env = build_envelope(&criteria, &options)?;
        Ok((criteria, options, env))
    }
}
