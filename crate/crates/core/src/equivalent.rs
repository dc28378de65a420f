//! Equivalent short fiber.
//!
//! A fiber of length `L~` whose ion populations are scaled by `L / L~`
//! (and, for thulium, whose cross-relaxation constant is scaled by
//! `L~ / L` so that `kappa_R N_0` is unchanged) has gains `L / L~` times
//! larger at the same irradiances. Keeping the original phase factors, its
//! per-mode powers approximate the long fiber's pulled back by
//! `zeta(z~) = z~ L / L~`.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::{DopantSpec, FiberSpec, LaunchSpec};
use crate::error::{Error, Result};
use crate::gain::{random_irradiance_pairs, DopantModel, GainMedium};
use crate::scalar::Scalar;
use crate::simulate::{PowerTrace, RunOptions, Simulator};

/// Dopant parameters of the short fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentTransform<T> {
    pub length: T,
    pub l_tilde: T,
    /// `L / L~`.
    pub scale: T,
    pub dopant: DopantSpec<T>,
}

impl<T: Scalar> EquivalentTransform<T> {
    pub fn new(dopant: &DopantSpec<T>, length: T, l_tilde: T) -> Result<Self> {
        Ok(EquivalentTransform {
            length,
            l_tilde,
            scale: length / l_tilde,
            dopant: transform_dopant(dopant, length, l_tilde)?,
        })
    }
}

/// Rescales the dopant for a fiber of length `l_tilde` standing in for one
/// of length `length`.
pub fn transform_dopant<T: Scalar>(dopant: &DopantSpec<T>, length: T, l_tilde: T) -> Result<DopantSpec<T>> {
    if !(l_tilde > T::zero() && length > T::zero() && l_tilde.is_finite() && length.is_finite()) {
        return Err(Error::InvalidArgument(format!("lengths must be positive (L = {length}, L~ = {l_tilde})")));
    }
    if l_tilde == length {
        return Ok(dopant.clone());
    }
    Ok(match dopant {
        DopantSpec::Tm(d) => {
            let mut d = d.clone();
            d.n_total = d.n_total * length / l_tilde;
            d.kappa_r = d.kappa_r * l_tilde / length;
            DopantSpec::Tm(d)
        }
        DopantSpec::Yb(d) => {
            let mut d = d.clone();
            d.n_total = d.n_total * length / l_tilde;
            DopantSpec::Yb(d)
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainScalingReport {
    pub scale: f64,
    pub samples: usize,
    /// Largest `|g~ - scale g|`, relative to `scale sigma_max N_total`.
    pub max_violation: f64,
    /// Largest `|g~ / (scale g) - 1|`. Grows near transparency, where `g`
    /// is a small difference of large terms.
    pub max_relative: f64,
}

/// Checks `g(transformed) = scale * g(original)` at random irradiances
/// drawn log-uniformly from `[1e-2, 1e14]` W/m^2 (see
/// [`random_irradiance_pairs`]).
pub fn gain_scaling_check<T: Scalar>(
    dopant: &DopantSpec<T>,
    fiber: &FiberSpec<T>,
    scale: T,
    samples: usize,
    seed: u64,
) -> Result<GainScalingReport> {
    if !(scale >= T::one()) {
        return Err(Error::InvalidArgument(format!("scale must be >= 1 (got {scale})")));
    }
    let original = DopantModel::new(dopant, fiber);
    let scaled = DopantModel::new(&transform_dopant(dopant, scale, T::one())?, fiber);
    let sigma_max = match dopant {
        DopantSpec::Tm(d) => [d.sigma_abs_s, d.sigma_ems_s, d.sigma_abs_p, d.sigma_ems_p],
        DopantSpec::Yb(d) => [d.sigma_abs_s, d.sigma_ems_s, d.sigma_abs_p, d.sigma_ems_p],
    }
    .into_iter()
    .fold(T::zero(), T::max);
    let reference = scale * sigma_max * dopant.n_total();
    let mut worst = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    let rel = |a: T, b: T| if a == b { 0.0 } else { ((a - b) / b).abs().as_f64() };
    for (i_s, i_p) in random_irradiance_pairs(samples, seed) {
        let (i_s, i_p) = (T::lit(i_s), T::lit(i_p));
        let g = original.gains_at(i_s, i_p);
        let h = scaled.gains_at(i_s, i_p);
        let v = ((h.signal - scale * g.signal).abs().max((h.pump - scale * g.pump).abs()) / reference).as_f64();
        worst = worst.max(v);
        worst_rel = worst_rel.max(rel(h.signal, scale * g.signal)).max(rel(h.pump, scale * g.pump));
    }
    Ok(GainScalingReport { scale: scale.as_f64(), samples, max_violation: worst, max_relative: worst_rel })
}

/// Long trace pulled back onto the short fiber's sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    /// `L / L~`.
    pub scale: T,
    /// "pump" followed by the mode names.
    pub channels: Vec<String>,
    pub z_short: Vec<T>,
    /// `differences[l][k] = P_l(zeta(z~_k)) - P~_l(z~_k)` (W).
    pub differences: Vec<Vec<T>>,
    pub max_abs: Vec<T>,
    /// Short-fiber position of each channel's largest deviation.
    pub argmax_z: Vec<T>,
    /// Largest deviation over every channel and sample.
    pub numerator: T,
    /// Largest power over every channel of the long trace.
    pub denominator: T,
    pub epsilon: T,
}

impl<T: Scalar> ComparisonReport<T> {
    /// Largest deviation over the signal modes only.
    pub fn max_abs_modes(&self) -> T {
        self.max_abs[1..].iter().copied().fold(T::zero(), T::max)
    }

    /// Sign changes of channel `l`'s deviation along the short fiber.
    pub fn sign_changes(&self, l: usize) -> usize {
        sign_changes(&self.differences[l])
    }

    /// Deviation of the total signal power at each short-fiber sample.
    pub fn signal_differences(&self) -> Vec<T> {
        (0..self.z_short.len())
            .map(|k| self.differences[1..].iter().fold(T::zero(), |acc, d| acc + d[k]))
            .collect()
    }
}

/// Sign changes along a series, skipping exact zeros.
pub fn sign_changes<T: Scalar>(series: &[T]) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for d in series {
        let s = if *d > T::zero() {
            1
        } else if *d < T::zero() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                n += 1;
            }
            last = s;
        }
    }
    n
}

/// Compares `short` (length `L~`) against `long` (length `L`) at every
/// short-fiber sample, interpolating the long trace.
pub fn compare_traces<T: Scalar>(long: &PowerTrace<T>, short: &PowerTrace<T>) -> ComparisonReport<T> {
    let scale = long.length() / short.length();
    let channels = long.mode_count() + 1;
    let mut names = vec!["pump".to_string()];
    names.extend(long.mode_names.iter().cloned());
    let mut differences = vec![Vec::with_capacity(short.len()); channels];
    let mut max_abs = vec![T::zero(); channels];
    let mut argmax_z = vec![T::zero(); channels];
    for (k, zt) in short.z.iter().enumerate() {
        // The last sample maps onto the far end exactly.
        let z = if k + 1 == short.len() { long.length() } else { *zt * scale };
        for l in 0..channels {
            let d = long.interpolate(l, z) - short.channel(l)[k];
            if d.abs() > max_abs[l] {
                max_abs[l] = d.abs();
                argmax_z[l] = *zt;
            }
            differences[l].push(d);
        }
    }
    let numerator = max_abs.iter().copied().fold(T::zero(), T::max);
    let denominator = (0..channels)
        .flat_map(|l| long.channel(l).iter().map(|p| p.abs()))
        .fold(T::zero(), T::max);
    ComparisonReport {
        scale,
        channels: names,
        z_short: short.z.clone(),
        differences,
        max_abs,
        argmax_z,
        numerator,
        denominator,
        epsilon: numerator / denominator,
    }
}

#[derive(Debug, Clone)]
pub struct EquivalentRun<T> {
    pub transform: EquivalentTransform<T>,
    pub short: PowerTrace<T>,
    pub long: Option<PowerTrace<T>>,
    pub report: Option<ComparisonReport<T>>,
    pub short_seconds: f64,
    pub long_seconds: Option<f64>,
}

/// Integrates the equivalent short fiber for `launch` and, when `compare`
/// is set, the original fiber too.
pub fn run_equivalent<T: Scalar>(
    sim: &Simulator<T>,
    l_tilde: T,
    launch: &LaunchSpec<T>,
    compare: bool,
) -> Result<EquivalentRun<T>> {
    let length = sim.config.fiber.length;
    if !(l_tilde > T::zero() && l_tilde <= length) {
        return Err(Error::InvalidArgument(format!("0 < L~ <= L violated (L~ = {l_tilde}, L = {length})")));
    }
    let transform = EquivalentTransform::new(&sim.config.dopant, length, l_tilde)?;
    let mut short_opts = sim.options(l_tilde, false)?;
    if compare {
        short_opts.stride = 1;
    }
    let t = Instant::now();
    let short = sim.run(&transform.dopant, launch, &short_opts)?;
    let short_seconds = t.elapsed().as_secs_f64();
    let (long, long_seconds, report) = if compare {
        let opts = RunOptions { stride: 1, ..sim.options(length, false)? };
        let t = Instant::now();
        let long = sim.run(&sim.config.dopant, launch, &opts)?;
        let secs = t.elapsed().as_secs_f64();
        let report = compare_traces(&long, &short);
        (Some(long), Some(secs), Some(report))
    } else {
        (None, None, None)
    };
    Ok(EquivalentRun { transform, short, long, report, short_seconds, long_seconds })
}

/// Every split of the signal power over `modes` modes in steps of
/// `percent_step` percent, first mode varying slowest and starting at 100%.
pub fn enumerate_launches<T: Scalar>(modes: usize, percent_step: u32) -> Result<Vec<Vec<T>>> {
    if modes == 0 || percent_step == 0 || 100 % percent_step != 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least one mode and a step dividing 100 (modes {modes}, step {percent_step})"
        )));
    }
    let parts = (100 / percent_step) as usize;
    let mut out = Vec::new();
    let mut current = vec![0usize; modes];
    compositions(parts, 0, &mut current, &mut out);
    Ok(out
        .into_iter()
        .map(|c| c.into_iter().map(|k| T::from_usize_lossy(k) / T::from_usize_lossy(parts)).collect())
        .collect())
}

fn compositions(left: usize, idx: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if idx + 1 == current.len() {
        current[idx] = left;
        out.push(current.clone());
        return;
    }
    for k in (0..=left).rev() {
        current[idx] = k;
        compositions(left - k, idx + 1, current, out);
    }
}

/// Grid of pump powers and short lengths for [`epsilon_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub pump_powers: Vec<T>,
    pub l_tildes: Vec<T>,
    pub percent_step: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell<T> {
    pub pump_power: T,
    pub l_tilde: T,
    /// `None` when any launch of this cell failed.
    pub epsilon: Option<T>,
    pub worst_launch: Option<Vec<T>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub pump_powers: Vec<T>,
    pub l_tildes: Vec<T>,
    pub launches: usize,
    /// Row-major: pump power outer, `L~` inner.
    pub cells: Vec<SweepCell<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn cell(&self, pump: usize, l_tilde: usize) -> &SweepCell<T> {
        &self.cells[pump * self.l_tildes.len() + l_tilde]
    }
}

/// Worst-case relative deviation between each short fiber and the original
/// over every enumerated launch, for every `(P_p0, L~)` pair.
///
/// One long run per pump power and launch is shared by all `L~`. Jobs run
/// in parallel; the result does not depend on scheduling.
pub fn epsilon_sweep<T: Scalar>(sim: &Simulator<T>, spec: &SweepSpec<T>) -> Result<SweepResult<T>> {
    if spec.pump_powers.is_empty() || spec.l_tildes.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be nonempty".into()));
    }
    let length = sim.config.fiber.length;
    for lt in &spec.l_tildes {
        if !(*lt > T::zero() && *lt <= length) {
            return Err(Error::InvalidArgument(format!("L~ = {lt} outside (0, {length}]")));
        }
    }
    let launches = enumerate_launches::<T>(sim.family.len(), spec.percent_step)?;
    let transforms = spec
        .l_tildes
        .iter()
        .map(|lt| EquivalentTransform::new(&sim.config.dopant, length, *lt))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..spec.pump_powers.len()).flat_map(|p| (0..launches.len()).map(move |l| (p, l))).collect();

    let results: Vec<Vec<Result<T, String>>> = jobs
        .par_iter()
        .map(|&(p, l)| {
            let launch = LaunchSpec {
                pump_power: spec.pump_powers[p],
                signal_power: sim.config.launch.signal_power,
                fractions: launches[l].clone(),
            };
            let long_opts = match sim.options(length, false) {
                Ok(o) => RunOptions { stride: 1, ..o },
                Err(e) => return vec![Err(e.to_string()); transforms.len()],
            };
            let long = match sim.run(&sim.config.dopant, &launch, &long_opts) {
                Ok(t) => t,
                Err(e) => return vec![Err(e.to_string()); transforms.len()],
            };
            transforms
                .iter()
                .map(|tr| {
                    // L~ = L is the identity transform: the short run would
                    // repeat the long one step for step.
                    if tr.l_tilde == length {
                        return Ok(compare_traces(&long, &long).epsilon);
                    }
                    let opts = RunOptions { stride: 1, ..sim.options(tr.l_tilde, false).map_err(|e| e.to_string())? };
                    let short = sim.run(&tr.dopant, &launch, &opts).map_err(|e| e.to_string())?;
                    Ok(compare_traces(&long, &short).epsilon)
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(spec.pump_powers.len() * spec.l_tildes.len());
    for (p, pp) in spec.pump_powers.iter().enumerate() {
        for (t, lt) in spec.l_tildes.iter().enumerate() {
            let mut cell = SweepCell { pump_power: *pp, l_tilde: *lt, epsilon: Some(T::zero()), worst_launch: None, error: None };
            for (j, &(jp, jl)) in jobs.iter().enumerate() {
                if jp != p {
                    continue;
                }
                match &results[j][t] {
                    Ok(eps) => {
                        if let Some(cur) = cell.epsilon {
                            if cell.worst_launch.is_none() || *eps > cur {
                                cell.epsilon = Some(*eps);
                                cell.worst_launch = Some(launches[jl].clone());
                            }
                        }
                    }
                    Err(e) => {
                        cell.epsilon = None;
                        cell.worst_launch = None;
                        cell.error.get_or_insert_with(|| e.clone());
                    }
                }
            }
            cells.push(cell);
        }
    }
    Ok(SweepResult { pump_powers: spec.pump_powers.clone(), l_tildes: spec.l_tildes.clone(), launches: launches.len(), cells })
}
