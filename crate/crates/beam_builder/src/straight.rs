//! Beams along a straight ray.

use abw_core::{mollifier_eval, Complex64, Domain, GridSpec, Vec2};
use abw_gauge::{GaugeField, GaugeTransform};
use abw_rays::RayFrame;
use ndarray::Array2;

use crate::kannai::kannai_prefactor;
use crate::{fresnel_integral, BeamError, BeamSpec, BrokenBeam, Method, PathExtent, TableResolution, TimeScaling, TransportTables};

#[derive(Debug, Clone)]
pub struct StraightBeam {
    spec: BeamSpec,
    field: GaugeField,
    initial_gauge: Option<GaugeTransform>,
    frame: RayFrame,
    tables: Option<TransportTables>,
}

impl StraightBeam {
    pub fn new(spec: BeamSpec, field: GaugeField) -> Result<Self, BeamError> {
        Self::with_options(spec, field, None, TableResolution::default())
    }

    /// `initial_gauge` multiplies the initial data by the gauge factor g, which is
    /// how a beam is carried into a transformed gauge.
    pub fn with_options(
        spec: BeamSpec,
        field: GaugeField,
        initial_gauge: Option<GaugeTransform>,
        resolution: TableResolution,
    ) -> Result<Self, BeamError> {
        spec.validate()?;
        let tables = if spec.order > 0 {
            Some(TransportTables::build(&spec, &field, initial_gauge.as_ref(), &resolution)?)
        } else {
            None
        };
        Ok(Self {
            frame: RayFrame::new(spec.base_point, spec.direction),
            spec,
            field,
            initial_gauge,
            tables,
        })
    }

    pub fn spec(&self) -> &BeamSpec {
        &self.spec
    }

    pub fn field(&self) -> &GaugeField {
        &self.field
    }

    pub fn tables(&self) -> Option<&TransportTables> {
        self.tables.as_ref()
    }

    /// Checks that the strip |τ| ≤ δ₁, s ∈ [s_min, s_max] stays clear of obstacles.
    pub fn check_strip(&self, domain: &Domain, s_min: f64, s_max: f64) -> Result<(), BeamError> {
        let d1 = self.spec.delta1;
        let inside = |p: Vec2| {
            let (s, tau) = self.frame.coordinates(p, 0.0);
            s >= s_min && s <= s_max && tau.abs() <= d1
        };
        for o in &domain.obstacles {
            let hit = o.shape.boundary_samples(512).into_iter().any(inside) || inside(o.shape.representative_point());
            let n = 256;
            let edge_hit = (0..=n).any(|i| {
                let s = s_min + (s_max - s_min) * i as f64 / n as f64;
                [-d1, d1].iter().any(|&tau| o.signed_distance(self.frame.point(s, tau)) <= 0.0)
            });
            if hit || edge_hit {
                return Err(BeamError::StripIntersectsObstacle(o.id.clone()));
            }
        }
        Ok(())
    }

    /// Characteristic coordinates (s, τ) of (x, t).
    pub fn coordinates(&self, x: Vec2, t: f64) -> (f64, f64) {
        self.frame.coordinates(x, t)
    }

    fn gauge_factor(&self, y: Vec2) -> Result<Complex64, BeamError> {
        match &self.initial_gauge {
            Some(g) => Ok(g.factor(&self.field, y)?),
            None => Ok(Complex64::new(1.0, 0.0)),
        }
    }

    /// Λ(x, t) = (e/ħc)∫₀ᵗ ω·A(x − t″ω) dt″.
    pub fn flux_phase(&self, x: Vec2, t: f64) -> Result<f64, BeamError> {
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.field.segment_phase(x - self.spec.direction * t, x)?)
    }

    fn cutoffs(&self, x: Vec2, t: f64) -> f64 {
        let (s, tau) = self.coordinates(x, t);
        0.5 * mollifier_eval(tau / self.spec.delta1) * mollifier_eval(s / self.spec.longitudinal_width())
    }

    /// Leading amplitude a₀(x,t) = ½χ₀(τ/δ₁)χ₀(s/δ₂k)·g(x − tω)·e^{iΛ(x,t)}.
    pub fn amplitude_a0(&self, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        let cut = self.cutoffs(x, t);
        if cut == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = self.gauge_factor(x - self.spec.direction * t)?;
        Ok(g * Complex64::from_polar(cut, self.flux_phase(x, t)?))
    }

    /// Amplitude a_n(x,t) for 0 ≤ n ≤ N.
    pub fn amplitude(&self, n: usize, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        if n == 0 {
            return self.amplitude_a0(x, t);
        }
        let tables = self
            .tables
            .as_ref()
            .filter(|tb| n <= tb.order())
            .ok_or_else(|| BeamError::InvalidSpec(format!("order {n} exceeds the built order {}", self.spec.order)))?;
        let (s, tau) = self.coordinates(x, t);
        let c = tables.c(n, s, tau, t);
        if c == Complex64::new(0.0, 0.0) {
            return Ok(c);
        }
        let g = self.gauge_factor(x - self.spec.direction * t)?;
        Ok(c * g * Complex64::from_polar(1.0, self.flux_phase(x, t)?))
    }

    /// A_N = Σ_{n≤N} a_n/(ik)ⁿ.
    pub fn amplitude_sum(&self, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        let mut acc = self.amplitude_a0(x, t)?;
        let Some(tables) = &self.tables else {
            return Ok(acc);
        };
        let (s, tau) = self.coordinates(x, t);
        let ik = Complex64::new(0.0, self.spec.k);
        let mut higher = Complex64::new(0.0, 0.0);
        for n in 1..=tables.order() {
            higher += tables.c(n, s, tau, t) / ik.powi(n as i32);
        }
        if higher != Complex64::new(0.0, 0.0) {
            let g = self.gauge_factor(x - self.spec.direction * t)?;
            acc += higher * g * Complex64::from_polar(1.0, self.flux_phase(x, t)?);
        }
        Ok(acc)
    }

    /// w_N(x,t) = e^{i(mk/ħ)(x·ω−t)}A_N(x,t) + e^{i(mk/ħ)(x·ω+t)}A_N(x,−t).
    pub fn w_n(&self, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        let kw = self.spec.wavenumber();
        let xo = x.dot(self.spec.direction);
        Ok(Complex64::from_polar(1.0, kw * (xo - t)) * self.amplitude_sum(x, t)?
            + Complex64::from_polar(1.0, kw * (xo + t)) * self.amplitude_sum(x, -t)?)
    }

    /// Initial data χ₀(τ/δ₁)χ₀(s/δ₂k)·g(x)·e^{i(mk/ħ)x·ω}.
    pub fn initial_data(&self, x: Vec2) -> Result<Complex64, BeamError> {
        let cut = 2.0 * self.cutoffs(x, 0.0);
        if cut == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.gauge_factor(x)? * Complex64::from_polar(cut, self.spec.wavenumber() * x.dot(self.spec.direction)))
    }

    fn carrier(&self, x: Vec2, t: f64) -> Complex64 {
        let c = &self.spec.constants;
        let k = self.spec.k;
        Complex64::from_polar(
            1.0,
            -c.mass * k * k * t / (2.0 * c.hbar) + self.spec.wavenumber() * x.dot(self.spec.direction),
        )
    }

    /// Leading stationary-phase value 2e^{−imk²t/2ħ + i(mk/ħ)x·ω}·a₀(x, kt).
    pub fn stationary_phase(&self, x: Vec2, t: f64, extent: PathExtent) -> Result<Complex64, BeamError> {
        if !(t > 0.0) {
            return Err(BeamError::NonPositiveTime(t));
        }
        let kt = self.spec.k * t;
        let cut = self.cutoffs(x, kt);
        if cut == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let phase = match extent {
            PathExtent::Finite => self.flux_phase(x, kt)?,
            PathExtent::Infinite => self.field.ray_phase_from_infinity(x, self.spec.direction)?,
        };
        let g = self.gauge_factor(x - self.spec.direction * kt)?;
        Ok(self.carrier(x, t) * g * Complex64::from_polar(2.0 * cut, phase))
    }

    /// x₀-interval outside which w_N(x, ·) vanishes (a-term).
    fn support(&self, x: Vec2) -> (f64, f64) {
        let sx = (x - self.spec.base_point).dot(self.spec.direction);
        let w = self.spec.longitudinal_width();
        (sx - w, sx + w)
    }

    fn max_panel(&self) -> f64 {
        let mut p = self.spec.longitudinal_width() / 16.0;
        if let Some(tb) = &self.tables {
            p = p.min(2.0 * tb.hs);
        }
        for term in &self.field.flux_terms {
            let d = ((term.center - self.spec.base_point).dot(self.spec.direction.perp()).abs() - self.spec.delta1).max(1e-3);
            p = p.min(d / 4.0);
        }
        p
    }

    /// Kannai transform of w_N by quadrature. The support of w_N(x, ·) is compact, so
    /// the regularization χ₀(εx₀) is identically one on it once 1/ε exceeds twice the
    /// support radius; the ε-limit is then reached exactly. By evenness of w_N the
    /// a- and b-terms contribute equally, and x₀ − kt centers the Fresnel phase.
    pub fn quadrature(&self, x: Vec2, t: f64) -> Result<Complex64, BeamError> {
        self.transform(x, t, |x0| self.amplitude_sum(x, x0))
    }

    fn transform<F>(&self, x: Vec2, t: f64, amp: F) -> Result<Complex64, BeamError>
    where
        F: Fn(f64) -> Result<Complex64, BeamError>,
    {
        if !(t > 0.0) {
            return Err(BeamError::NonPositiveTime(t));
        }
        let c = &self.spec.constants;
        let kt = self.spec.k * t;
        let a = c.mass / (2.0 * c.hbar * t);
        let (lo, hi) = self.support(x);
        let mut err = None;
        let val = fresnel_integral(
            |u| match amp(u + kt) {
                Ok(v) => v,
                Err(e) => {
                    err = err.take().or(Some(e));
                    Complex64::new(0.0, 0.0)
                }
            },
            a,
            lo - kt,
            hi - kt,
            12.0,
            self.max_panel(),
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(kannai_prefactor(c, t) * self.carrier(x, t) * val * 2.0)
    }

    /// L² norm over `sample` of the Kannai-transformed source g_N produced by
    /// applying ((ħ²/2m)∂²_t + H) to w_N.
    pub fn residual_norm(&self, sample: &GridSpec, t: f64) -> Result<f64, BeamError> {
        let built;
        let tables = match &self.tables {
            Some(tb) => tb,
            None => {
                built = TransportTables::build(&self.spec, &self.field, self.initial_gauge.as_ref(), &TableResolution::default())?;
                &built
            }
        };
        let rho = tables.residual_coefficients(self.spec.k);
        let field = self.residual_field(sample, t, tables, &rho)?;
        Ok((field.iter().map(|v| v.norm_sqr()).sum::<f64>() * sample.cell_area()).sqrt())
    }

    fn residual_field(
        &self,
        sample: &GridSpec,
        t: f64,
        tables: &TransportTables,
        rho: &[Array2<Complex64>],
    ) -> Result<Array2<Complex64>, BeamError> {
        let mut out = Array2::zeros(sample.shape());
        for j in 0..sample.ny {
            for i in 0..sample.nx {
                let x = sample.point(i, j);
                out[[j, i]] = self.transform(x, t, |x0| {
                    let (s, tau) = self.coordinates(x, x0);
                    let r = tables.eval_poly(rho, s, tau, x0);
                    if r == Complex64::new(0.0, 0.0) {
                        return Ok(r);
                    }
                    let g = self.gauge_factor(x - self.spec.direction * x0)?;
                    Ok(r * g * Complex64::from_polar(1.0, self.flux_phase(x, x0)?))
                })?;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub enum BeamKind {
    Straight(StraightBeam),
    Broken(BrokenBeam),
}

/// Evaluable beam u_N(x,t).
#[derive(Debug, Clone)]
pub struct BeamSolution {
    pub beam: BeamKind,
    pub method: Method,
    pub time_scaling: TimeScaling,
    pub extent: PathExtent,
}

impl BeamSolution {
    pub fn straight(beam: StraightBeam, method: Method, time_scaling: TimeScaling) -> Self {
        Self {
            beam: BeamKind::Straight(beam),
            method,
            time_scaling,
            extent: PathExtent::Finite,
        }
    }

    pub fn broken(beam: BrokenBeam) -> Self {
        Self {
            beam: BeamKind::Broken(beam),
            method: Method::StationaryPhase,
            time_scaling: TimeScaling::ShortTime,
            extent: PathExtent::Finite,
        }
    }

    fn k(&self) -> f64 {
        match &self.beam {
            BeamKind::Straight(b) => b.spec.k,
            BeamKind::Broken(b) => b.spec().k,
        }
    }

    /// Physical time for the time argument under the configured scaling.
    pub fn physical_time(&self, time: f64) -> f64 {
        match self.time_scaling {
            TimeScaling::Plain => time,
            TimeScaling::ShortTime => time / self.k(),
        }
    }

    pub fn evaluate(&self, x: Vec2, time: f64) -> Result<Complex64, BeamError> {
        let t = self.physical_time(time);
        match (&self.beam, self.method) {
            (BeamKind::Straight(b), Method::StationaryPhase) => b.stationary_phase(x, t, self.extent),
            (BeamKind::Straight(b), Method::Quadrature) => b.quadrature(x, t),
            (BeamKind::Broken(b), _) => b.stationary_phase(x, t),
        }
    }
}
