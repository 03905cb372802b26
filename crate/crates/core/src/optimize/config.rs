use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};

/// Levenberg-Marquardt settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Stop when the infinity norm of the MSE gradient drops below this.
    pub gradient_tol: f64,
    /// Stop when the projected step's infinity norm drops below this.
    pub step_tol: f64,
    pub initial_damping: f64,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Starting point; the box center when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tol: 1e-10,
            step_tol: 1e-12,
            initial_damping: 1e-3,
            fd_step: 1e-6,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub max_iterations: usize,
    /// Velocity limit as a fraction of the box width.
    pub velocity_clamp: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            max_iterations: 100,
            velocity_clamp: 0.5,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::Config("pso.swarm_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.inertia) {
            return Err(Error::Config(format!(
                "pso.inertia must lie in [0, 1), got {}",
                self.inertia
            )));
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0) {
            return Err(Error::Config(
                "pso.cognitive and pso.social must be >= 0".into(),
            ));
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp <= 1.0) {
            return Err(Error::Config(
                "pso.velocity_clamp must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Simulated annealing settings. Temperatures are in volt squared (MSE units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub t0: f64,
    /// Geometric cooling factor applied after every iteration.
    pub cooling: f64,
    pub iterations: usize,
    /// Initial Gaussian proposal standard deviation, fraction of box width.
    pub step: f64,
    /// Final proposal standard deviation; the step shrinks geometrically.
    pub step_final: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            t0: 1e-6,
            cooling: 0.999,
            iterations: 10_000,
            step: 0.1,
            step_final: 1e-4,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::Config("sa.t0 must be >= 0".into()));
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return Err(Error::Config("sa.cooling must lie in (0, 1]".into()));
        }
        if !(self.step >= 0.0 && self.step_final >= 0.0) {
            return Err(Error::Config(
                "sa.step and sa.step_final must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Initial mutation standard deviation, fraction of box width.
    pub mutation_scale: f64,
    pub mutation_scale_final: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 4000,
            mutation_rate: 0.3,
            mutation_scale: 0.1,
            mutation_scale_final: 1e-4,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::Config("ga.population must be >= 4".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config("ga.mutation_rate must lie in [0, 1]".into()));
        }
        if !(self.mutation_scale >= 0.0 && self.mutation_scale_final >= 0.0) {
            return Err(Error::Config("ga mutation scales must be >= 0".into()));
        }
        Ok(())
    }
}

/// Settings for every optimizer, usually loaded from a key-value file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub ls: LmConfig,
    pub pso: PsoConfig,
    pub sa: SaConfig,
    pub ga: GaConfig,
}

const KNOWN_PREFIXES: [&str; 4] = ["ls.", "pso.", "sa.", "ga."];

impl OptimizerConfig {
    /// Read `ls.*`, `pso.*`, `sa.*` and `ga.*` keys; other keys are ignored,
    /// unknown keys inside those namespaces are rejected.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut c = Self::default();
        kv::set(kv, "ls.max_iterations", &mut c.ls.max_iterations)?;
        kv::set(kv, "ls.gradient_tol", &mut c.ls.gradient_tol)?;
        kv::set(kv, "ls.step_tol", &mut c.ls.step_tol)?;
        kv::set(kv, "ls.damping", &mut c.ls.initial_damping)?;
        kv::set(kv, "ls.fd_step", &mut c.ls.fd_step)?;
        if let Some(v) = kv.get("ls.initial") {
            let parsed: std::result::Result<Vec<f64>, _> =
                v.split(',').map(|s| s.trim().parse::<f64>()).collect();
            c.ls.initial = Some(parsed.map_err(|e| Error::Config(format!("ls.initial={v}: {e}")))?);
        }

        kv::set(kv, "pso.swarm_size", &mut c.pso.swarm_size)?;
        kv::set(kv, "pso.inertia", &mut c.pso.inertia)?;
        kv::set(kv, "pso.cognitive", &mut c.pso.cognitive)?;
        kv::set(kv, "pso.social", &mut c.pso.social)?;
        kv::set(kv, "pso.max_iterations", &mut c.pso.max_iterations)?;
        kv::set(kv, "pso.velocity_clamp", &mut c.pso.velocity_clamp)?;

        kv::set(kv, "sa.t0", &mut c.sa.t0)?;
        kv::set(kv, "sa.cooling", &mut c.sa.cooling)?;
        kv::set(kv, "sa.iterations", &mut c.sa.iterations)?;
        kv::set(kv, "sa.step", &mut c.sa.step)?;
        kv::set(kv, "sa.step_final", &mut c.sa.step_final)?;

        kv::set(kv, "ga.population", &mut c.ga.population)?;
        kv::set(kv, "ga.generations", &mut c.ga.generations)?;
        kv::set(kv, "ga.mutation_rate", &mut c.ga.mutation_rate)?;
        kv::set(kv, "ga.mutation_scale", &mut c.ga.mutation_scale)?;
        kv::set(
            kv,
            "ga.mutation_scale_final",
            &mut c.ga.mutation_scale_final,
        )?;

        let known = Self::keys();
        if let Some(k) = kv
            .keys()
            .filter(|k| KNOWN_PREFIXES.iter().any(|p| k.starts_with(p)))
            .find(|k| !known.contains(&k.as_str()))
        {
            return Err(Error::Config(format!("unknown optimizer key `{k}`")));
        }
        c.validate()?;
        Ok(c)
    }

    pub fn keys() -> &'static [&'static str] {
        &[
            "ls.max_iterations",
            "ls.gradient_tol",
            "ls.step_tol",
            "ls.damping",
            "ls.fd_step",
            "ls.initial",
            "pso.swarm_size",
            "pso.inertia",
            "pso.cognitive",
            "pso.social",
            "pso.max_iterations",
            "pso.velocity_clamp",
            "sa.t0",
            "sa.cooling",
            "sa.iterations",
            "sa.step",
            "sa.step_final",
            "ga.population",
            "ga.generations",
            "ga.mutation_rate",
            "ga.mutation_scale",
            "ga.mutation_scale_final",
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.pso.validate()?;
        self.sa.validate()?;
        self.ga.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_when_empty() {
        let c = OptimizerConfig::from_kv(&KeyValues::new()).unwrap();
        assert_eq!(c, OptimizerConfig::default());
        assert_eq!(c.pso.swarm_size, 30);
        assert_eq!(c.pso.inertia, 0.729);
        assert_eq!(c.pso.cognitive, 1.49445);
        assert_eq!(c.ls.max_iterations, 200);
    }

    #[test]
    fn overrides_and_unknown_keys() {
        let kv = kv::parse_kv("pso.swarm_size=12\nsa.t0=0\nga.population=8\nls.initial=0.1,0.01,100,0.02,5000\ncol.voltage=V\n").unwrap();
        let c = OptimizerConfig::from_kv(&kv).unwrap();
        assert_eq!(c.pso.swarm_size, 12);
        assert_eq!(c.sa.t0, 0.0);
        assert_eq!(c.ga.population, 8);
        assert_eq!(
            c.ls.initial.as_deref(),
            Some(&[0.1, 0.01, 100.0, 0.02, 5000.0][..])
        );

        let bad = kv::parse_kv("pso.swarmsize=12\n").unwrap();
        assert!(OptimizerConfig::from_kv(&bad).is_err());
        let invalid = kv::parse_kv("ga.population=2\n").unwrap();
        assert!(OptimizerConfig::from_kv(&invalid).is_err());
    }
}
