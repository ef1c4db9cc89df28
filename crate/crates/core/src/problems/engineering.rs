use super::{ConstraintSet, Evaluation, Sense};
use crate::scalar::Scalar;

#[inline]
fn c<T: Scalar>(v: f64) -> T {
    T::lit(v)
}

/// x = (R, L, T_h, T_s); plate counts are multiplied by 0.0625 in.
pub(super) fn pressure_vessel<T: Scalar>(x: &[T]) -> Evaluation<T> {
    let (r, l, th, ts) = (x[0], x[1], x[2], x[3]);
    let plate = c::<T>(0.0625);
    let head = plate * th;
    let shell = plate * ts;
    let f = c::<T>(0.6224) * r * l * head
        + c::<T>(1.7781) * r * r * shell
        + c::<T>(3.1661) * l * head * head
        + c::<T>(19.84) * r * head * head;
    let pi = T::lit(std::f64::consts::PI);
    let mut g = ConstraintSet::with_capacity(4);
    // thickness limits are in inches, like the objective
    g.push(&[-head, c::<T>(0.0193) * r]);
    g.push(&[-shell, c::<T>(0.00954) * r]);
    g.push(&[-pi * r * r * l, -c::<T>(4.0 / 3.0) * pi * r * r * r, c(1_296_000.0)]);
    g.push(&[l, c(-240.0)]);
    g.finish(f, Sense::Minimize)
}

/// Alkylation profit, maximized.
///
/// The profit is the negation of the cost expression
/// `1.715 x1 + 0.035 x1 x6 + 4.0565 x3 + 10 x2 - 0.063 x3 x5`, which is
/// negative at every known good design.
pub(super) fn alkylation<T: Scalar>(x: &[T]) -> Evaluation<T> {
    let (x1, x2, x3, x4, x5, x6, x7) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
    let cost = c::<T>(1.715) * x1 + c::<T>(0.035) * x1 * x6 + c::<T>(4.0565) * x3 + c::<T>(10.0) * x2
        - c::<T>(0.063) * x3 * x5;
    let mut g = ConstraintSet::with_capacity(14);
    g.push(&[c::<T>(0.0059553571) * x6 * x6 * x1, c::<T>(0.88392857) * x3, -c::<T>(0.1175625) * x6 * x1, -x1]);
    g.push(&[c::<T>(1.1088) * x1, c::<T>(0.1303533) * x1 * x6, -c::<T>(0.0066033) * x1 * x6 * x6, -x3]);
    g.push(&[
        c::<T>(6.66173269) * x6 * x6,
        c::<T>(172.39878) * x5,
        -c::<T>(56.596669) * x4,
        -c::<T>(191.20592) * x6,
        c(-10000.0),
    ]);
    g.push(&[c::<T>(1.08702) * x6, c::<T>(0.32175) * x4, -c::<T>(0.03762) * x6 * x6, -x5, c(56.85075)]);
    g.push(&[c::<T>(0.006198) * x7 * x4 * x3, c::<T>(2462.3121) * x2, -c::<T>(25.125634) * x2 * x4, -x3 * x4]);
    g.push(&[c::<T>(161.18996) * x4 * x3, c::<T>(5000.0) * x2 * x4, -c::<T>(489510.0) * x2, -x3 * x4 * x7]);
    g.push(&[c::<T>(0.33) * x7, -x5, c(44.333333)]);
    g.push(&[c::<T>(0.022556) * x5, -c::<T>(0.007595) * x7, c(-1.0)]);
    g.push(&[c::<T>(0.00061) * x3, -c::<T>(0.0005) * x1, c(-1.0)]);
    g.push(&[c::<T>(0.819672) * x1, -x3, c(0.819672)]);
    g.push(&[c::<T>(24500.0) * x2, -c::<T>(250.0) * x2 * x4, -x3 * x4]);
    g.push(&[c::<T>(1020.4082) * x4 * x2, c::<T>(1.2244898) * x3 * x4, -c::<T>(100000.0) * x2]);
    g.push(&[c::<T>(6.25) * x1 * x6, c::<T>(6.25) * x1, -c::<T>(7.625) * x3, c(-100000.0)]);
    g.push(&[c::<T>(1.22) * x3, -x6 * x1, -x1, c(1.0)]);
    g.finish(-cost, Sense::Maximize)
}

/// Total exchanger area after eliminating the equality constraints.
pub(super) fn heat_exchanger<T: Scalar>(x: &[T]) -> Evaluation<T> {
    let (x1, x2, x3, x4, x5) = (x[0], x[1], x[2], x[3], x[4]);
    let mut g = ConstraintSet::with_capacity(3);
    g.push(&[c::<T>(100.0) * x1, -x1 * (c::<T>(400.0) - x4), c::<T>(833.33252) * x4, c(-83333.333)]);
    g.push(&[x2 * x4, -x2 * (c::<T>(400.0) - x5 + x4), -c::<T>(1250.0) * x4, c::<T>(1250.0) * x5]);
    g.push(&[x3 * x5, -x3 * (c::<T>(100.0) + x5), -c::<T>(2500.0) * x5, c(1_250_000.0)]);
    g.finish(x1 + x2 + x3, Sense::Minimize)
}

/// Squared deviation of the gear ratio `x1 x2 / (x3 x4)` from 1/6.931.
pub(super) fn gear_train<T: Scalar>(x: &[T]) -> T {
    let d = c::<T>(1.0 / 6.931) - (x[0] * x[1]) / (x[2] * x[3]);
    d * d
}

/// x = (d, D, N): wire diameter, coil diameter, active coils.
pub(super) fn spring<T: Scalar>(x: &[T]) -> Evaluation<T> {
    let (d, big_d, n) = (x[0], x[1], x[2]);
    let f = (n + c(2.0)) * big_d * d * d;
    let one = T::one();
    let d2 = d * d;
    let d3 = d2 * d;
    let d4 = d3 * d;
    let mut g = ConstraintSet::with_capacity(4);
    g.push(&[one, -(big_d * big_d * big_d * n) / (c::<T>(71785.0) * d4)]);
    g.push(&[
        (c::<T>(4.0) * big_d * big_d - d * big_d) / (c::<T>(12566.0) * (big_d * d3 - d4)),
        one / (c::<T>(5108.0) * d2),
        -one,
    ]);
    g.push(&[one, -(c::<T>(140.45) * d) / (big_d * big_d * n)]);
    g.push(&[(big_d + d) / c(1.5), -one]);
    g.finish(f, Sense::Minimize)
}

/// x = (h, l, t, b).
pub(super) fn welded_beam<T: Scalar>(x: &[T]) -> Evaluation<T> {
    let (h, l, t, b) = (x[0], x[1], x[2], x[3]);
    let p = c::<T>(6000.0);
    let len = c::<T>(14.0);
    let e = c::<T>(30e6);
    let gm = c::<T>(12e6);
    let two = c::<T>(2.0);

    let f = c::<T>(1.10471) * h * h * l + c::<T>(0.04811) * t * b * (c::<T>(14.0) + l);

    let root = two.sqrt() * h * l;
    let tau_p = p / root;
    let m = p * (len + l / two);
    let half = (h + t) / two;
    let r = (l * l / c(4.0) + half * half).sqrt();
    let j = two * (root * (l * l / c(12.0) + half * half));
    let tau_pp = m * r / j;
    let tau = (tau_p * tau_p + two * tau_p * tau_pp * l / (two * r) + tau_pp * tau_pp).sqrt();
    let sigma = c::<T>(6.0) * p * len / (b * t * t);
    let delta = c::<T>(4.0) * p * len * len * len / (e * t * t * t * b);
    let pc = c::<T>(4.013) * e * (t * t * b * b * b * b * b * b / c(36.0)).sqrt() / (len * len)
        * (T::one() - t / (two * len) * (e / (c::<T>(4.0) * gm)).sqrt());

    let mut g = ConstraintSet::with_capacity(7);
    g.push(&[tau, c(-13600.0)]);
    g.push(&[sigma, c(-30000.0)]);
    g.push(&[h, -b]);
    g.push(&[c::<T>(0.10471) * h * h, c::<T>(0.04811) * t * b * (c::<T>(14.0) + l), c(-5.0)]);
    g.push(&[c(0.125), -h]);
    g.push(&[delta, c(-0.25)]);
    g.push(&[p, -pc]);
    g.finish(f, Sense::Minimize)
}

#[cfg(test)]
mod tests {
    use super::super::Problem;

    #[test]
    fn gear_train_optimum() {
        let f = Problem::GearTrain.evaluate(&[19.0f64, 16.0, 43.0, 49.0]).unwrap().objective;
        assert!((f - 2.70e-12).abs() < 0.005e-12, "{f:e}");
    }

    #[test]
    fn pressure_vessel_best_design() {
        let e = Problem::PressureVessel.evaluate(&[38.8601f64, 221.365, 12.0, 6.0]).unwrap();
        assert!((e.objective - 5850.37).abs() < 0.005);
        assert!(e.is_feasible_within_slack());
    }

    #[test]
    fn welded_beam_best_design() {
        let e = Problem::WeldedBeam.evaluate(&[0.205729f64, 3.47051, 9.03662, 0.2057296]).unwrap();
        assert!((e.objective - 1.72485217).abs() < 5e-6);
        assert!(e.is_feasible_within_slack());
    }

    #[test]
    fn heat_exchanger_objective_is_area_sum() {
        let e = Problem::HeatExchanger.evaluate(&[579.19f64, 1360.13, 5109.92, 182.01, 295.60]).unwrap();
        assert!((e.objective - 7049.24).abs() < 1e-9);
        assert_eq!(e.violations.len(), 3);
    }

    #[test]
    fn alkylation_is_positive_profit() {
        let e = Problem::Alkylation.evaluate(&[1698.18f64, 53.66, 3031.3, 90.11, 95.0, 10.5, 153.53]).unwrap();
        assert!((e.objective - 1772.8022).abs() < 1e-3, "{}", e.objective);
        assert!(e.cost() < 0.0);
    }

    #[test]
    fn spring_weight() {
        let e = Problem::Spring.evaluate(&[0.051689f64, 0.356732, 11.2881]).unwrap();
        assert!((e.objective - 0.012_664_884).abs() < 1e-9);
    }

    #[test]
    fn f32_agrees_with_f64() {
        let x64 = [38.8601f64, 221.365, 12.0, 6.0];
        let x32: Vec<f32> = x64.iter().map(|&v| v as f32).collect();
        let a = Problem::PressureVessel.evaluate(&x64).unwrap().objective;
        let b = Problem::PressureVessel.evaluate(&x32).unwrap().objective as f64;
        assert!((a - b).abs() / a < 1e-5);
    }
}
