//! Beams along broken rays: leading order, one term per leg.

use abw_core::{mollifier_eval, Complex64, Domain, Vec2};
use abw_gauge::{GaugeField, GaugeTransform};
use abw_rays::{eikonal_phase, trace_broken_ray, BrokenRay, EikonalPhase, RayError};

use crate::{BeamError, BeamSpec};

/// Contribution of one leg at (x, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrokenSample {
    pub leg: usize,
    /// ψ_p(x).
    pub psi: f64,
    /// ½·cutoffs·(−1)^p·g/√J, without the flux phase.
    pub c0: Complex64,
    /// (e/ħc)∫A·dx along the broken path from the initial position to x.
    pub flux_phase: f64,
    /// Initial position of the wave reaching x.
    pub origin: Vec2,
}

impl BrokenSample {
    pub fn amplitude(&self) -> Complex64 {
        self.c0 * Complex64::from_polar(1.0, self.flux_phase)
    }
}

#[derive(Debug, Clone)]
pub struct BrokenBeam {
    spec: BeamSpec,
    field: GaugeField,
    initial_gauge: Option<GaugeTransform>,
    ray: BrokenRay,
    phases: Vec<EikonalPhase>,
}

const SIDE_TOL: f64 = 1e-9;

impl BrokenBeam {
    /// Traces the central ray from the base point and builds the eikonal of every
    /// leg. Only the leading order is supported.
    pub fn new(
        spec: BeamSpec,
        field: GaugeField,
        domain: &Domain,
        max_reflections: usize,
        initial_gauge: Option<GaugeTransform>,
    ) -> Result<Self, BeamError> {
        spec.validate()?;
        if spec.order != 0 {
            return Err(BeamError::InvalidSpec("broken-ray beams are built at order 0".into()));
        }
        let ray = trace_broken_ray(spec.base_point, spec.direction, domain, max_reflections)?;
        let phases = (0..ray.legs.len())
            .map(|p| eikonal_phase(&ray, p, spec.delta1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            spec,
            field,
            initial_gauge,
            ray,
            phases,
        })
    }

    pub fn spec(&self) -> &BeamSpec {
        &self.spec
    }

    pub fn ray(&self) -> &BrokenRay {
        &self.ray
    }

    pub fn phases(&self) -> &[EikonalPhase] {
        &self.phases
    }

    /// Leg-p data at (x, t) with t the wave-equation time; `None` where the leg does
    /// not reach x (outside the tube or on the far side of a surface).
    pub fn sample(&self, leg: usize, x: Vec2, t: f64) -> Result<Option<BrokenSample>, BeamError> {
        let ph = &self.phases[leg];
        let smp = match ph.evaluate(x) {
            Ok(s) => s,
            Err(RayError::OutsideTube { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        if (leg > 0 && smp.leg_arc < -SIDE_TOL) || smp.leg_arc > smp.leg_length + SIDE_TOL {
            return Ok(None);
        }
        let s0 = smp.arc - t;
        let cut = 0.5 * mollifier_eval(smp.offset / self.spec.delta1) * mollifier_eval(s0 / self.spec.longitudinal_width());
        let origin = smp.start + self.spec.direction * s0;
        if cut == 0.0 {
            return Ok(Some(BrokenSample {
                leg,
                psi: smp.value,
                c0: Complex64::new(0.0, 0.0),
                flux_phase: 0.0,
                origin,
            }));
        }
        let joints = ph
            .joints(smp.offset)?
            .ok_or(BeamError::Ray(RayError::OutsideTube { x1: x.x1, x2: x.x2, leg }))?;
        let mut flux = 0.0;
        let mut prev = origin;
        for &j in joints.iter().skip(1) {
            flux += self.field.segment_phase(prev, j)?;
            prev = j;
        }
        flux += self.field.segment_phase(prev, x)?;
        let sign = if leg % 2 == 0 { 1.0 } else { -1.0 };
        let g = match &self.initial_gauge {
            Some(g) => g.factor(&self.field, origin)?,
            None => Complex64::new(1.0, 0.0),
        };
        Ok(Some(BrokenSample {
            leg,
            psi: smp.value,
            c0: g * (sign * cut / smp.jacobian.sqrt()),
            flux_phase: flux,
            origin,
        }))
    }

    /// All contributing legs at (x, t).
    pub fn samples(&self, x: Vec2, t: f64) -> Result<Vec<BrokenSample>, BeamError> {
        let mut out = Vec::new();
        for p in 0..self.phases.len() {
            if let Some(s) = self.sample(p, x, t)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Leading amplitude of leg p, a_p0(x,t) = c₀·e^{i·flux}.
    pub fn amplitude(&self, leg: usize, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        Ok(self.sample(leg, x, t)?.map_or(Complex64::new(0.0, 0.0), |s| s.amplitude()))
    }

    /// w₀(x,t) = Σ_p e^{i(mk/ħ)(ψ_p−t)}a_p0(x,t) + e^{i(mk/ħ)(ψ_p+t)}a_p0(x,−t).
    pub fn w_n(&self, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        let kw = self.spec.wavenumber();
        let mut acc = Complex64::new(0.0, 0.0);
        for sgn in [1.0, -1.0] {
            for s in self.samples(x, sgn * t)? {
                acc += Complex64::from_polar(1.0, kw * (s.psi - sgn * t)) * s.amplitude();
            }
        }
        Ok(acc)
    }

    /// Initial data χ₀(η/δ₁)χ₀(s/δ₂k)·g·e^{i(mk/ħ)x·ω₁}, assuming its support lies on
    /// the first leg.
    pub fn initial_data(&self, x: Vec2) -> Result<Complex64, BeamError> {
        let perp = self.spec.direction.perp();
        let r = x - self.spec.base_point;
        let cut = mollifier_eval(r.dot(perp) / self.spec.delta1) * mollifier_eval(r.dot(self.spec.direction) / self.spec.longitudinal_width());
        if cut == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = match &self.initial_gauge {
            Some(g) => g.factor(&self.field, x)?,
            None => Complex64::new(1.0, 0.0),
        };
        Ok(g * Complex64::from_polar(cut, self.spec.wavenumber() * x.dot(self.spec.direction)))
    }

    /// Leading stationary-phase value Σ_p 2e^{−imk²t/2ħ + i(mk/ħ)ψ_p(x)}·a_p0(x, kt),
    /// t the physical time.
    pub fn stationary_phase(&self, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        if !(t > 0.0) {
            return Err(BeamError::NonPositiveTime(t));
        }
        let c = &self.spec.constants;
        let k = self.spec.k;
        let kw = self.spec.wavenumber();
        let base = -c.mass * k * k * t / (2.0 * c.hbar);
        let mut acc = Complex64::new(0.0, 0.0);
        for s in self.samples(x, k * t)? {
            acc += Complex64::from_polar(2.0, base + kw * s.psi) * s.amplitude();
        }
        Ok(acc)
    }
}
