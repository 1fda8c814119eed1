//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Every key has a built-in default; a config file only lists overrides.
//! Unknown sections or keys are rejected so typos cannot silently fall back
//! to defaults.

use anyhow::{bail, Context, Result};

use catspec::lineprofile::{DriveParams, SpectralModel};
use catspec::signal::ProtocolParams;
use catspec::statistics::{DetectorModel, MethodsConfig};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub protocol: ProtocolParams<f64>,
    pub detector: DetectorModel,
    pub spectral: SpectralModel<f64>,
    pub drive: DriveParams<f64>,
    pub methods: MethodsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolParams::experiment_defaults(),
            detector: DetectorModel::default(),
            spectral: SpectralModel::default(),
            drive: DriveParams::experiment_defaults(),
            methods: MethodsConfig::experiment_defaults(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {line_no}: expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            config
                .apply(&section, key, value)
                .with_context(|| format!("line {line_no}: [{section}] {key}"))?;
        }
        config.protocol.validate().map_err(anyhow::Error::from)?;
        config.detector.validate().map_err(anyhow::Error::from)?;
        config.spectral.validate().map_err(anyhow::Error::from)?;
        config.drive.validate().map_err(anyhow::Error::from)?;
        config.methods.protocol = config.protocol;
        config.methods.detector = config.detector;
        Ok(config)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .with_context(|| format!("malformed number `{value}`"))
        };
        let int = || -> Result<usize> {
            value
                .parse::<usize>()
                .with_context(|| format!("malformed integer `{value}`"))
        };
        match (section, key) {
            ("protocol", "alpha") => self.protocol.alpha = num()?,
            ("protocol", "eta_abs") => self.protocol.eta_abs = num()?,
            ("protocol", "eta_em") => self.protocol.eta_em = num()?,
            ("protocol", "mode_freq") => self.protocol.mode_freq = num()?,
            ("protocol", "heating_rate") => self.protocol.heating_rate = num()?,
            ("protocol", "tau_cat") => self.protocol.tau_cat = num()?,
            ("protocol", "tau_wait") => self.protocol.tau_wait = num()?,
            ("protocol", "branch_blue") => self.protocol.branch_blue = num()?,
            ("detector", "mean_dark") => self.detector.mean_dark = num()?,
            ("detector", "mean_bright") => self.detector.mean_bright = num()?,
            ("detector", "window") => self.detector.window = num()?,
            ("detector", "threshold") => self.detector.threshold = int()? as u64,
            ("detector", "metastable_lifetime") => self.detector.metastable_lifetime = num()?,
            ("spectral", "natural_fwhm") => self.spectral.natural_fwhm = num()?,
            ("spectral", "b_field") => self.spectral.b_field = num()?,
            ("spectral", "g_lower") => self.spectral.g_lower = num()?,
            ("spectral", "g_upper") => self.spectral.g_upper = num()?,
            ("drive", "power") => self.drive.power = num()?,
            ("drive", "duration") => self.drive.duration = num()?,
            ("drive", "saturation_scale") => self.drive.saturation_scale = num()?,
            ("methods", "scatter_prob") => self.methods.scatter_prob = num()?,
            ("methods", "direct_eta") => self.methods.direct_eta = num()?,
            ("methods", "background_excitation") => {
                self.methods.background_excitation = num()?
            }
            ("methods", "ps_offset") => self.methods.ps_offset = num()?,
            ("methods", "ps_mapping_contrast") => self.methods.ps_mapping_contrast = num()?,
            ("methods", "no_gsc_contrast") => self.methods.no_gsc_contrast = num()?,
            _ => bail!("unknown config key"),
        }
        Ok(())
    }
}
