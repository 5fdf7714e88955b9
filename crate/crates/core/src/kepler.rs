//! Planar satellite motion in Kepler elements.
//!
//! States are polar `(ρ̇, ϑ̇, ρ, ϑ)` with `ϑ` measured from the polar axis;
//! elements are the dimensionless parameter `P` (semi-latus rectum over the
//! reference length), the eccentricity `E` and the pericenter argument `Y`.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::numerics::quadrature::segment_average;

/// Gravitational parameter, reference length and perturbation strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanetModel {
    /// m³/s²
    pub gm: f64,
    /// m
    pub r: f64,
    /// J₂/2, dimensionless.
    pub epsilon: f64,
}

impl PlanetModel {
    pub const EARTH: PlanetModel = PlanetModel {
        gm: 3.98600442e14,
        r: 6.378135e6,
        epsilon: 5.457e-4,
    };

    pub fn new(gm: f64, r: f64, epsilon: f64) -> Result<Self> {
        let p = Self { gm, r, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gm > 0.0 && self.gm.is_finite()) {
            return Err(Error::InvalidArgument(format!("GM must be positive, got {}", self.gm)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidArgument(format!("reference length must be positive, got {}", self.r)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Polar state of the satellite in its orbital plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarState {
    /// m/s
    pub rho_dot: f64,
    /// rad/s
    pub theta_dot: f64,
    /// m
    pub rho: f64,
    /// rad
    pub theta: f64,
}

impl PlanarState {
    /// Unperturbed energy per unit mass.
    pub fn energy(&self, planet: &PlanetModel) -> f64 {
        0.5 * (self.rho_dot * self.rho_dot + self.rho * self.rho * self.theta_dot * self.theta_dot)
            - planet.gm / self.rho
    }

    /// Prograde and bound: the osculating orbit is an ellipse.
    pub fn in_domain(&self, planet: &PlanetModel) -> bool {
        self.rho > 0.0 && self.theta_dot > 0.0 && self.energy(planet) < 0.0
    }
}

/// Osculating elements together with the fast angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerElements {
    pub p: f64,
    pub e: f64,
    /// Pericenter argument, lifted to the real line.
    pub y: f64,
    pub theta: f64,
}

impl KeplerElements {
    pub fn new(p: f64, e: f64, y: f64, theta: f64) -> Result<Self> {
        let k = Self { p, e, y, theta };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::OutsideDomain(format!("parameter must be positive, got {}", self.p)));
        }
        if !(self.e > 0.0 && self.e < 1.0) {
            return Err(Error::Eccentricity(self.e));
        }
        if !self.y.is_finite() || !self.theta.is_finite() {
            return Err(Error::OutsideDomain("non-finite angle".into()));
        }
        Ok(())
    }

    pub fn slow(&self) -> Vector3<f64> {
        Vector3::new(self.p, self.e, self.y)
    }
}

/// Apocenter, pericenter and period of the unperturbed ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry {
    /// m
    pub rho_plus: f64,
    /// m
    pub rho_minus: f64,
    /// s
    pub t_orb: f64,
}

const ECC_FLOOR: f64 = 1e-12;

pub fn elements_from_state(state: &PlanarState, planet: &PlanetModel) -> Result<KeplerElements> {
    let PlanarState {
        rho_dot,
        theta_dot,
        rho,
        theta,
    } = *state;
    if !(rho > 0.0) {
        return Err(Error::OutsideDomain(format!("radius must be positive, got {rho}")));
    }
    if !(theta_dot > 0.0) {
        return Err(Error::OutsideDomain(format!("retrograde or radial motion (theta_dot = {theta_dot})")));
    }
    let energy = state.energy(planet);
    if !(energy < 0.0) {
        return Err(Error::OutsideDomain(format!("non-negative energy {energy}")));
    }
    let ang2 = rho.powi(4) * theta_dot * theta_dot;
    let p = ang2 / (planet.r * planet.gm);
    let e2 = 1.0 + 2.0 * ang2 / (planet.gm * planet.gm) * energy;
    let e = e2.max(0.0).sqrt();
    if e < ECC_FLOOR || e >= 1.0 {
        return Err(Error::Eccentricity(e));
    }
    let rp = planet.r * p;
    let e_sin = rho_dot * (rp / planet.gm).sqrt();
    let e_cos = rp / rho - 1.0;
    let mut phase = e_sin.atan2(e_cos);
    if phase >= PI {
        phase = -PI;
    }
    Ok(KeplerElements {
        p,
        e,
        y: theta - phase,
        theta,
    })
}

pub fn state_from_elements(elems: &KeplerElements, planet: &PlanetModel) -> PlanarState {
    let KeplerElements { p, e, y, theta } = *elems;
    let c = (theta - y).cos();
    let s = (theta - y).sin();
    let one = 1.0 + e * c;
    PlanarState {
        rho_dot: (planet.gm / (planet.r * p)).sqrt() * e * s,
        theta_dot: (planet.gm / (planet.r.powi(3) * p.powi(3))).sqrt() * one * one,
        rho: planet.r * p / one,
        theta,
    }
}

pub fn apsides_and_period(p: f64, e: f64, planet: &PlanetModel) -> Result<OrbitGeometry> {
    if !(p > 0.0) {
        return Err(Error::OutsideDomain(format!("parameter must be positive, got {p}")));
    }
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Eccentricity(e));
    }
    let rp = planet.r * p;
    Ok(OrbitGeometry {
        rho_plus: rp / (1.0 - e),
        rho_minus: rp / (1.0 + e),
        t_orb: 2.0 * PI * (rp.powi(3) / (planet.gm * (1.0 - e * e).powi(3))).sqrt(),
    })
}

/// Inverse of the apsides part of [`apsides_and_period`]; returns `(P, E)`.
pub fn elements_from_apsides(rho_plus: f64, rho_minus: f64, planet: &PlanetModel) -> Result<(f64, f64)> {
    if !(rho_minus > 0.0 && rho_plus >= rho_minus) {
        return Err(Error::InvalidArgument(format!(
            "need rho_plus >= rho_minus > 0, got ({rho_plus}, {rho_minus})"
        )));
    }
    let sum = rho_plus + rho_minus;
    Ok((2.0 * rho_plus * rho_minus / (planet.r * sum), (rho_plus - rho_minus) / sum))
}

/// Perturbation strength of a uniform oblate ellipsoid with polar to
/// equatorial axis ratio `alpha`.
pub fn j2_epsilon_ellipsoid(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("axis ratio must be positive, got {alpha}")));
    }
    Ok((1.0 - alpha * alpha) / 10.0)
}

/// Quadrupole potential per unit `ε` (specific energy, m²/s²).
pub fn j2_potential_w(rho: f64, theta: f64, planet: &PlanetModel) -> f64 {
    let c = theta.cos();
    -planet.gm * planet.r * planet.r / rho.powi(3) * (1.0 - 3.0 * c * c)
}

/// A conservative planar perturbation `W(ρ, ϑ)` per unit `ε`.
pub trait PlanarPotential {
    fn value(&self, rho: f64, theta: f64, planet: &PlanetModel) -> f64;
    /// `(∂W/∂ρ, ∂W/∂ϑ)`.
    fn partials(&self, rho: f64, theta: f64, planet: &PlanetModel) -> (f64, f64);
}

/// The quadrupole (J₂) term.
#[derive(Debug, Clone, Copy, Default)]
pub struct J2Potential;

impl PlanarPotential for J2Potential {
    fn value(&self, rho: f64, theta: f64, planet: &PlanetModel) -> f64 {
        j2_potential_w(rho, theta, planet)
    }

    fn partials(&self, rho: f64, theta: f64, planet: &PlanetModel) -> (f64, f64) {
        let k = planet.gm * planet.r * planet.r;
        let c = theta.cos();
        let d_rho = 3.0 * k / rho.powi(4) * (1.0 - 3.0 * c * c);
        let d_theta = -3.0 * k / rho.powi(3) * (2.0 * theta).sin();
        (d_rho, d_theta)
    }
}

/// No perturbation at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPerturbation;

impl PlanarPotential for NoPerturbation {
    fn value(&self, _: f64, _: f64, _: &PlanetModel) -> f64 {
        0.0
    }

    fn partials(&self, _: f64, _: f64, _: &PlanetModel) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Right-hand side of the element equations in the orbit counter, with
/// `ε` factored out, for an arbitrary conservative planar perturbation.
pub fn field_from_potential<W: PlanarPotential>(
    elems: &KeplerElements,
    potential: &W,
    planet: &PlanetModel,
) -> Result<Vector3<f64>> {
    if elems.e == 0.0 {
        return Err(Error::Eccentricity(0.0));
    }
    let st = state_from_elements(elems, planet);
    let (dw_rho, dw_theta) = potential.partials(st.rho, st.theta, planet);
    let q_rho = -dw_rho;
    let q_theta = -dw_theta;
    let KeplerElements { p, e, y, theta } = *elems;
    let c = (theta - y).cos();
    let s = (theta - y).sin();
    let one = 1.0 + e * c;
    let one2 = one * one;
    let q_r = planet.r * planet.r * q_rho / planet.gm;
    let q_t = planet.r * q_theta / planet.gm;
    let f_p = 4.0 * PI * p * p / one2 * q_t;
    let f_e = 2.0 * PI * p * p * s / one2 * q_r + PI * p * (3.0 * e + 4.0 * c + e * (2.0 * (theta - y)).cos()) / one2 * q_t;
    let f_y = -2.0 * PI * p * p * c / (e * one2) * q_r + 2.0 * PI * p * s * (2.0 + e * c) / (e * one2) * q_t;
    Ok(Vector3::new(f_p, f_e, f_y))
}

/// Closed-form J₂ field `(f^P, f^E, f^Y)` at slow variables `(p, e, y)` and
/// fast angle `theta`.
pub fn j2_field(p: f64, e: f64, y: f64, theta: f64) -> Vector3<f64> {
    let (t, e2) = (theta, e * e);
    let sin = f64::sin;
    let cos = f64::cos;
    let f_p = 6.0 * PI / p * (e * sin(t + y) + 2.0 * sin(2.0 * t) + e * sin(3.0 * t - y));
    let f_e = 3.0 * PI / (8.0 * p * p)
        * (e2 * sin(t - 3.0 * y)
            + (8.0 + 2.0 * e2) * sin(t - y)
            + (4.0 + 11.0 * e2) * sin(t + y)
            + 8.0 * e * sin(2.0 * t - 2.0 * y)
            + 40.0 * e * sin(2.0 * t)
            + 2.0 * e2 * sin(3.0 * t - 3.0 * y)
            + (28.0 + 17.0 * e2) * sin(3.0 * t - y)
            + 24.0 * e * sin(4.0 * t - 2.0 * y)
            + 5.0 * e2 * sin(5.0 * t - 3.0 * y));
    let f_y = -3.0 * PI / (p * p)
        - 3.0 * PI / (8.0 * e * p * p)
            * (e2 * cos(t - 3.0 * y) + (8.0 + 6.0 * e2) * cos(t - y) - (4.0 - 7.0 * e2) * cos(t + y)
                + 8.0 * e * cos(2.0 * t - 2.0 * y)
                + 24.0 * e * cos(2.0 * t)
                + 2.0 * e2 * cos(3.0 * t - 3.0 * y)
                + (28.0 + 11.0 * e2) * cos(3.0 * t - y)
                + 24.0 * e * cos(4.0 * t - 2.0 * y)
                + 5.0 * e2 * cos(5.0 * t - 3.0 * y));
    Vector3::new(f_p, f_e, f_y)
}

/// Elapsed physical time (seconds) at each orbit-counter value in
/// `t_orbits`, for an element trajectory `elements_at(𝔱) = (P, E, Y)`.
///
/// `t_orbits` must be nondecreasing and start at or after 0.
pub fn physical_time<F>(mut elements_at: F, t_orbits: &[f64], planet: &PlanetModel) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Vector3<f64>,
{
    const PANEL: f64 = 1.0 / 16.0;
    let mut out = Vec::with_capacity(t_orbits.len());
    let mut acc = 0.0;
    let mut t_prev = 0.0;
    let scale = (planet.gm / planet.r.powi(3)).sqrt();
    for &t in t_orbits {
        if !(t >= t_prev) {
            return Err(Error::InvalidArgument(format!(
                "orbit counters must be nondecreasing and nonnegative, got {t} after {t_prev}"
            )));
        }
        let panels = ((t - t_prev) / PANEL).ceil().max(1.0) as usize;
        let h = (t - t_prev) / panels as f64;
        for k in 0..panels {
            let a = t_prev + h * k as f64;
            let piece = segment_average(
                |x| {
                    let tc = a + h * x;
                    let i = elements_at(tc);
                    let one = 1.0 + i[1] * (2.0 * PI * tc - i[2]).cos();
                    let theta_dot = scale / i[0].powf(1.5) * one * one;
                    2.0 * PI / theta_dot
                },
                1e-12,
            )?;
            acc += h * piece;
        }
        out.push(acc);
        t_prev = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EARTH: PlanetModel = PlanetModel::EARTH;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn earth_is_valid() {
        assert!(EARTH.validate().is_ok());
        assert!(PlanetModel::new(-1.0, 1.0, 1.0).is_err());
        assert!(PlanetModel::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn polar_example_round_trip_and_pericenter() {
        let k = KeplerElements::new(3.0, 0.6640, 0.0, 0.0).unwrap();
        let st = state_from_elements(&k, &EARTH);
        assert_eq!(st.rho_dot, 0.0);
        assert!(rel(st.rho, 1.1500e7) < 5e-4);
        let back = elements_from_state(&st, &EARTH).unwrap();
        assert!(rel(back.p, 3.0) < 1e-12);
        assert!(rel(back.e, 0.6640) < 1e-12);
        assert!(back.y.abs() < 1e-12);
    }

    #[test]
    fn polar_example_apocenter() {
        let k = KeplerElements::new(3.0, 0.6640, 0.0, PI).unwrap();
        let st = state_from_elements(&k, &EARTH);
        assert!(rel(st.rho, 5.695e7) < 5e-4);
    }

    #[test]
    fn domain_violations_are_rejected() {
        let k = KeplerElements::new(3.0, 0.5, 0.0, 0.3).unwrap();
        let mut st = state_from_elements(&k, &EARTH);
        st.theta_dot = -st.theta_dot;
        assert!(elements_from_state(&st, &EARTH).is_err());
        let mut hyper = state_from_elements(&k, &EARTH);
        hyper.rho_dot *= 50.0;
        assert!(elements_from_state(&hyper, &EARTH).is_err());
        let rho: f64 = 2.0e7;
        let circ = PlanarState {
            rho_dot: 0.0,
            theta_dot: (EARTH.gm / rho.powi(3)).sqrt(),
            rho,
            theta: 1.0,
        };
        assert!(matches!(elements_from_state(&circ, &EARTH), Err(Error::Eccentricity(_))));
        assert!(KeplerElements::new(2.0, 0.0, 0.0, 0.0).is_err());
        assert!(KeplerElements::new(2.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn geometry_of_the_two_examples() {
        let g = apsides_and_period(3.0, 0.6640, &EARTH).unwrap();
        assert!(rel(g.rho_plus, 56950e3) < 1e-3);
        assert!(rel(g.rho_minus, 11500e3) < 1e-3);
        assert!(rel(g.t_orb / 3600.0, 17.50) < 1e-3);
        let g = apsides_and_period(1.973, 0.8817, &EARTH).unwrap();
        assert!(rel(g.rho_plus, 106400e3) < 1e-3);
        assert!(rel(g.rho_minus, 6688e3) < 1e-3);
        assert!(rel(g.t_orb / 3600.0, 37.16) < 1e-3);
    }

    #[test]
    fn circular_reference_orbit() {
        let g = apsides_and_period(1.0, 0.0, &EARTH).unwrap();
        assert_eq!(g.rho_plus, EARTH.r);
        assert_eq!(g.rho_minus, EARTH.r);
        assert!((g.t_orb / 3600.0 - 1.408150).abs() < 1e-4);
    }

    #[test]
    fn apsides_inversion() {
        let (p, e) = elements_from_apsides(EARTH.r, EARTH.r, &EARTH).unwrap();
        assert!((p - 1.0).abs() < 1e-15 && e == 0.0);
        let (p, e) = elements_from_apsides(56950e3, 11500e3, &EARTH).unwrap();
        assert!((p - 3.0).abs() < 1e-3 && (e - 0.664).abs() < 1e-3);
        assert!(elements_from_apsides(1.0, 2.0, &EARTH).is_err());
    }

    #[test]
    fn ellipsoid_epsilon() {
        assert_eq!(j2_epsilon_ellipsoid(1.0).unwrap(), 0.0);
        assert!((j2_epsilon_ellipsoid(0.9).unwrap() - 0.019).abs() < 1e-15);
        assert!(j2_epsilon_ellipsoid(0.0).is_err());
    }

    #[test]
    fn ellipsoid_epsilon_matches_mass_integral() {
        // (1 / 4 M R²) ∫ (r² − 2z²) dM for a uniform ellipsoid, R = 1
        let alpha: f64 = 0.9;
        let volume = 4.0 / 3.0 * PI * alpha;
        let integral = segment_average(
            |u| {
                let z = alpha * (2.0 * u - 1.0);
                let rmax2 = 1.0 - z * z / (alpha * alpha);
                // ∫₀^rmax r (r² − 2z²) dr · 2π
                let inner = 2.0 * PI * (rmax2 * rmax2 / 4.0 - z * z * rmax2);
                2.0 * alpha * inner
            },
            1e-15,
        )
        .unwrap();
        let eps = integral / (4.0 * volume);
        assert!((eps - 0.019).abs() < 1e-14, "{eps}");
    }

    #[test]
    fn potential_values() {
        let c = (1.0f64 / 3.0).sqrt().acos();
        assert!(j2_potential_w(2.0e7, c, &EARTH).abs() < 1e-6);
        let rho: f64 = 1.7e7;
        let k = EARTH.gm * EARTH.r * EARTH.r / rho.powi(3);
        assert!(rel(j2_potential_w(rho, PI / 2.0, &EARTH), -k) < 1e-15);
        // Second zonal term of the expansion with J2 = 2: -(GM/ρ)(R/ρ)² · (−J2 P2(1)) ... at ρ = R, ϑ = 0
        let p2 = |z: f64| 0.5 * (3.0 * z * z - 1.0);
        let from_expansion = -(EARTH.gm / EARTH.r) * (-2.0 * p2(1.0));
        assert!(rel(j2_potential_w(EARTH.r, 0.0, &EARTH), from_expansion) < 1e-15);
        assert!(rel(j2_potential_w(EARTH.r, 0.0, &EARTH), 2.0 * EARTH.gm / EARTH.r) < 1e-15);
    }

    #[test]
    fn potential_partials_match_finite_differences() {
        let pot = J2Potential;
        for (rho, th) in [(1.2e7, 0.3), (3.0e7, 2.1), (8.0e6, 4.4)] {
            let (dr, dt) = pot.partials(rho, th, &EARTH);
            let hr = 1.0;
            let ht = 1e-6;
            let fr = (pot.value(rho + hr, th, &EARTH) - pot.value(rho - hr, th, &EARTH)) / (2.0 * hr);
            let ft = (pot.value(rho, th + ht, &EARTH) - pot.value(rho, th - ht, &EARTH)) / (2.0 * ht);
            assert!(rel(fr, dr) < 1e-6);
            assert!((ft - dt).abs() < 1e-6 * dt.abs().max(1.0));
        }
    }

    #[test]
    fn unperturbed_field_vanishes() {
        let k = KeplerElements::new(2.0, 0.3, 0.4, 1.1).unwrap();
        assert_eq!(field_from_potential(&k, &NoPerturbation, &EARTH).unwrap(), Vector3::zeros());
    }

    #[test]
    fn field_from_potential_matches_closed_form_at_sample() {
        let k = KeplerElements::new(3.0, 0.6640, 0.2, 1.0).unwrap();
        let a = field_from_potential(&k, &J2Potential, &EARTH).unwrap();
        let b = j2_field(3.0, 0.6640, 0.2, 1.0);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1e-9 * b[i].abs().max(1e-300), "{i}: {a} {b}");
        }
    }

    #[test]
    fn closed_form_cancellation() {
        let f = j2_field(3.0, 0.6640, 0.0, PI / 2.0);
        assert!(f[0].abs() < 1e-14);
    }

    #[test]
    fn closed_form_averages() {
        use crate::numerics::quadrature::periodic_average_vec;
        let avg = periodic_average_vec(
            |t, out| {
                let f = j2_field(3.0, 0.6640, 0.0, t);
                out.copy_from_slice(f.as_slice());
            },
            3,
            1e-13,
        )
        .unwrap();
        assert!(avg[0].abs() < 1e-10 && avg[1].abs() < 1e-10);
        assert!((avg[2] + 3.0 * PI / 9.0).abs() < 1e-10);
        assert!((avg[2] + 1.04720).abs() < 1e-5);
    }

    #[test]
    fn physical_time_examples() {
        let i = Vector3::new(3.0, 0.6640, 0.0);
        let t = physical_time(|_| i, &[0.0, 1.0, 3000.0], &EARTH).unwrap();
        assert_eq!(t[0], 0.0);
        let g = apsides_and_period(3.0, 0.6640, &EARTH).unwrap();
        assert!(rel(t[1], g.t_orb) < 1e-8);
        let years = t[2] / (365.25 * 86400.0);
        assert!((years - 6.0).abs() < 0.1, "{years}");
        assert!(physical_time(|_| i, &[1.0, 0.5], &EARTH).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn round_trip(p in 1.0f64..4.0, e in 0.1f64..0.9, y in -PI..PI, th in 0.0f64..(2.0 * PI)) {
            let k = KeplerElements::new(p, e, y, th).unwrap();
            let st = state_from_elements(&k, &EARTH);
            prop_assert!(st.in_domain(&EARTH));
            let back = elements_from_state(&st, &EARTH).unwrap();
            prop_assert!(rel(back.p, p) < 1e-10);
            prop_assert!(rel(back.e, e) < 1e-10);
            let dy = (back.y - y).rem_euclid(2.0 * PI);
            prop_assert!(dy.min(2.0 * PI - dy) < 1e-10);
            prop_assert!(back.y > th - PI && back.y <= th + PI);
            if st.rho_dot != 0.0 {
                prop_assert_eq!(st.rho_dot > 0.0, (th - back.y).sin() > 0.0);
            }
        }

        #[test]
        fn potential_field_equals_closed_form(p in 1.0f64..4.0, e in 0.05f64..0.95, y in -PI..PI, th in 0.0f64..(2.0 * PI)) {
            let k = KeplerElements::new(p, e, y, th).unwrap();
            let a = field_from_potential(&k, &J2Potential, &EARTH).unwrap();
            let b = j2_field(p, e, y, th);
            let scale = b.amax().max(1e-12);
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn apsides_pair_is_identity(p in 0.5f64..6.0, e in 0.0f64..0.95) {
            let g = apsides_and_period(p, e, &EARTH).unwrap();
            let (p2, e2) = elements_from_apsides(g.rho_plus, g.rho_minus, &EARTH).unwrap();
            prop_assert!(rel(p2, p) < 1e-12);
            prop_assert!((e2 - e).abs() < 1e-12);
        }
    }
}
