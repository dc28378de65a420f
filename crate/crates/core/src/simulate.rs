//! Launch conditions, step-count rule and sampled power traces.

use num_complex::Complex;

use crate::cmt::{CmtSystem, StateVector};
use crate::config::{DopantSpec, LaunchSpec, SimConfig, SolverKind};
use crate::error::{Error, Result};
use crate::gain::{DopantModel, GainMedium};
use crate::modes::ModeFamily;
use crate::ode::{OdeSystem, Stepper};
use crate::quadrature::{build_rule, CrossSectionRule};
use crate::scalar::Scalar;

/// Samples kept when no stride is requested.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Per-mode powers sampled along the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace<T> {
    pub mode_names: Vec<String>,
    pub z: Vec<T>,
    /// Pump power (W).
    pub pump: Vec<T>,
    /// `modes[l][k]`: power in mode `l` at sample `k` (W).
    pub modes: Vec<Vec<T>>,
    /// Total signal power including cross terms (W).
    pub signal: Vec<T>,
    /// `dP/dz` for the pump and each mode, from the ODE right-hand side.
    pub d_pump: Vec<T>,
    pub d_modes: Vec<Vec<T>>,
    /// Flat states `[I_p, A_1..A_M]` at every sample, when requested.
    pub states: Option<Vec<Vec<Complex<T>>>>,
    pub steps: usize,
    pub step_size: T,
    pub solver: SolverKind,
    /// Largest Dormand-Prince embedded error estimate over the run.
    pub max_embedded_error: T,
}

impl<T: Scalar> PowerTrace<T> {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Power channel `l`: 0 is the pump, `1..=M` are the modes.
    pub fn channel(&self, l: usize) -> &[T] {
        if l == 0 {
            &self.pump
        } else {
            &self.modes[l - 1]
        }
    }

    pub fn channel_derivative(&self, l: usize) -> &[T] {
        if l == 0 {
            &self.d_pump
        } else {
            &self.d_modes[l - 1]
        }
    }

    pub fn length(&self) -> T {
        *self.z.last().expect("nonempty trace")
    }

    /// Cubic Hermite interpolation of channel `l` at `x`, using the stored
    /// derivatives. Clamped to the sampled range.
    pub fn interpolate(&self, l: usize, x: T) -> T {
        let z = &self.z;
        let p = self.channel(l);
        let d = self.channel_derivative(l);
        let n = z.len();
        if n == 1 || x <= z[0] {
            return p[0];
        }
        if x >= z[n - 1] {
            return p[n - 1];
        }
        let k = z.partition_point(|v| *v <= x).clamp(1, n - 1) - 1;
        let h = z[k + 1] - z[k];
        let t = (x - z[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * p[k] + h10 * h * d[k] + h01 * p[k + 1] + h11 * h * d[k + 1]
    }
}

/// Integration controls for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions<T> {
    pub length: T,
    pub steps: usize,
    pub solver: SolverKind,
    pub stride: usize,
    pub keep_states: bool,
}

/// Stride giving roughly [`DEFAULT_SAMPLES`] samples.
pub fn default_stride(steps: usize) -> usize {
    (steps / DEFAULT_SAMPLES).max(1)
}

/// Flat launch state: `I_p = P_p0 / (pi r_clad^2)`, `A_l = sqrt(f_l P_s0)`.
pub fn launch_state<T: Scalar>(launch: &LaunchSpec<T>, clad_area: T, modes: usize) -> Result<StateVector<T>> {
    if launch.fractions.len() != modes {
        return Err(Error::LaunchMismatch { given: launch.fractions.len(), modes });
    }
    crate::config::validate_fractions(&launch.fractions)?;
    Ok(StateVector {
        z: T::zero(),
        pump_irradiance: launch.pump_power / clad_area,
        amplitudes: launch
            .fractions
            .iter()
            .map(|f| Complex::new((*f * launch.signal_power).sqrt(), T::zero()))
            .collect(),
    })
}

/// Integrates `system` from `y0` and samples the powers.
pub fn integrate<T: Scalar, G: GainMedium<T>>(
    system: &CmtSystem<T, G>,
    y0: &StateVector<T>,
    opts: &RunOptions<T>,
) -> Result<PowerTrace<T>> {
    if opts.steps == 0 || opts.stride == 0 {
        return Err(Error::InvalidArgument("steps and stride must be positive".into()));
    }
    let m = system.mode_count();
    if y0.amplitudes.len() != m {
        return Err(Error::LaunchMismatch { given: y0.amplitudes.len(), modes: m });
    }
    let area = system.cladding_area();
    let f = |z: T, y: &[Complex<T>], dy: &mut [Complex<T>]| system.rhs(z, y, dy);
    let h = opts.length / T::from_usize_lossy(opts.steps);
    let samples = opts.steps / opts.stride + 2;
    let mut trace = PowerTrace {
        mode_names: Vec::new(),
        z: Vec::with_capacity(samples),
        pump: Vec::with_capacity(samples),
        modes: vec![Vec::with_capacity(samples); m],
        signal: Vec::with_capacity(samples),
        d_pump: Vec::with_capacity(samples),
        d_modes: vec![Vec::with_capacity(samples); m],
        states: opts.keep_states.then(Vec::new),
        steps: opts.steps,
        step_size: h,
        solver: opts.solver,
        max_embedded_error: T::zero(),
    };
    let record = |trace: &mut PowerTrace<T>, z: T, y: &[Complex<T>], dy: &[Complex<T>]| {
        trace.z.push(z);
        trace.pump.push(y[0].re * area);
        trace.d_pump.push(dy[0].re * area);
        for l in 0..m {
            let a = y[l + 1];
            trace.modes[l].push(a.norm_sqr());
            trace.d_modes[l].push(T::lit(2.0) * (a.conj() * dy[l + 1]).re);
        }
        trace.signal.push(system.signal_power(z, &y[1..]));
        if let Some(states) = trace.states.as_mut() {
            states.push(y.to_vec());
        }
    };

    let mut stepper = Stepper::new(opts.solver, m + 1);
    let mut y = y0.to_flat();
    let mut before = y.clone();
    for k in 0..opts.steps {
        let z = h * T::from_usize_lossy(k);
        let sample = k % opts.stride == 0;
        if sample {
            before.copy_from_slice(&y);
        }
        stepper.step(&f, z, h, &mut y);
        trace.max_embedded_error = trace.max_embedded_error.max(stepper.last_error());
        if sample {
            record(&mut trace, z, &before, stepper.derivative());
        }
        if y.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { z: (z + h).as_f64() });
        }
    }
    let mut dy = vec![Complex::new(T::zero(), T::zero()); m + 1];
    f.eval(opts.length, &y, &mut dy);
    record(&mut trace, opts.length, &y, &dy);
    Ok(trace)
}

/// A configured fiber: quadrature rule and normalized guided modes.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    pub config: SimConfig<T>,
    pub rule: CrossSectionRule<T>,
    pub family: ModeFamily<T>,
}

impl<T: Scalar> Simulator<T> {
    pub fn new(config: SimConfig<T>) -> Result<Self> {
        config.validate()?;
        let rule = build_rule(&config.fiber, config.numerics.radial_quad_order, config.numerics.angular_quad_points);
        let family = ModeFamily::solve(&config.fiber, &rule)?;
        if config.launch.fractions.len() != family.len() {
            return Err(Error::LaunchMismatch { given: config.launch.fractions.len(), modes: family.len() });
        }
        Ok(Simulator { config, rule, family })
    }

    pub fn system(&self, dopant: &DopantSpec<T>) -> CmtSystem<T, DopantModel<T>> {
        let medium = DopantModel::new(dopant, &self.config.fiber);
        CmtSystem::new(&self.config.fiber, &self.family.modes, &self.rule, medium)
    }

    /// Steps for `length`: `ceil(length * steps_per_beat / beat_length)`,
    /// or the single-mode density when only one mode is guided.
    pub fn step_count(&self, length: T) -> Result<usize> {
        if self.family.len() == 1 {
            let n = (length.as_f64() * self.config.numerics.single_mode_steps_per_meter).ceil();
            return Ok((n as usize).max(1));
        }
        self.family.step_count(length, self.config.numerics.steps_per_beat)
    }

    pub fn options(&self, length: T, keep_states: bool) -> Result<RunOptions<T>> {
        let steps = self.step_count(length)?;
        Ok(RunOptions {
            length,
            steps,
            solver: self.config.numerics.solver,
            stride: self.config.numerics.output_stride.unwrap_or_else(|| default_stride(steps)),
            keep_states,
        })
    }

    /// Runs `dopant` and `launch` over `opts.length`.
    pub fn run(&self, dopant: &DopantSpec<T>, launch: &LaunchSpec<T>, opts: &RunOptions<T>) -> Result<PowerTrace<T>> {
        let system = self.system(dopant);
        let y0 = launch_state(launch, system.cladding_area(), self.family.len())?;
        let mut trace = integrate(&system, &y0, opts)?;
        trace.mode_names = self.family.names();
        Ok(trace)
    }

    /// The configured run.
    pub fn simulate(&self) -> Result<PowerTrace<T>> {
        let opts = self.options(self.config.fiber.length, false)?;
        self.run(&self.config.dopant, &self.config.launch, &opts)
    }
}
