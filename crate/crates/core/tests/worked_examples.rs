//! Statements about the multiplicative, Honda and supersingular examples that
//! can be read off directly.

use fglab_core::isogeny::{coordinate_norm_coherence, quotient_fgl, stagewise_quotient, Psi};
use fglab_core::level::{discriminant_check, height, level_ring};
use fglab_core::theta::{delta_op, rnorm, ThetaStructure};
use fglab_core::*;

fn law(kind: &str, p: u64, n: u32) -> FormalGroupLaw {
    FormalGroupLaw::standard(&kind.parse().unwrap(), &RingTower::base(p, n).unwrap(), 12).unwrap()
}

#[test]
fn multiplicative_law_and_p_series() {
    for p in [2u64, 3, 5] {
        let g = law("mult", p, 6);
        assert_eq!(g.law().to_text(), "1 * x1 + 1 * x2 + -1 * x1 x2");
        // [p](x) = 1 - (1 - x)^p
        let r = g.ring().clone();
        let one_minus_x = MPSeries::univariate(&r, &[r.one(), r.from_int(-1)], true);
        let expected = MPSeries::one(&r, 1).sub(&one_minus_x.pow(p as u32).unwrap()).unwrap();
        assert_eq!(g.p_series(12).unwrap().first_difference(&expected).unwrap(), None);
        assert_eq!(height(&g).unwrap(), 1);
    }
}

#[test]
fn supersingular_curve_has_height_two() {
    let g = law("weier:0,0,1,0,0", 2, 4);
    assert_eq!(g.p_series(12).unwrap().wdeg().unwrap(), 4);
    assert_eq!(height(&g).unwrap(), 2);
    assert_eq!(height(&law("honda:2", 2, 4)).unwrap(), 2);
}

#[test]
fn level_of_cyclic_p_is_pointy_p_quotient() {
    for (p, n) in [(2u64, 8u32), (3, 6), (5, 4)] {
        let level = level_ring(&format!("Z/{p}").parse().unwrap(), &law("mult", p, n)).unwrap();
        assert_eq!(level.ring.rank() as u64, p - 1);
        let pointy = level.law.pointy_p(16).unwrap();
        let root = level.point(&[1]);
        assert!(pointy.eval(std::slice::from_ref(root)).unwrap().is_zero());
    }
}

#[test]
fn discriminant_is_unit_times_power_of_points() {
    for (kind, p, n, a) in
        [("mult", 2, 8, "Z/2"), ("mult", 3, 6, "Z/3"), ("mult", 2, 10, "Z/4"), ("honda:2", 2, 4, "Z/2")]
    {
        let level = level_ring(&a.parse().unwrap(), &law(kind, p, n)).unwrap();
        let d = discriminant_check(&level, None).unwrap();
        assert!(!d.is_degenerate(), "{kind} {a}");
        assert!(d.unit.is_unit());
        assert_eq!(d.unit.mul(&d.rhs).unwrap(), d.delta);
    }
}

#[test]
fn lubin_coordinate_is_unit_times_power_mod_maximal_ideal() {
    for (kind, p, n, a, order) in
        [("mult", 2u64, 8u32, "Z/2", 2usize), ("mult", 3, 6, "Z/3", 3), ("honda:2", 2, 4, "Z/2", 2)]
    {
        let level = level_ring(&a.parse().unwrap(), &law(kind, p, n)).unwrap();
        let q = quotient_fgl(&level, 8).unwrap();
        assert!(q.certificate.holds());
        assert_eq!(q.phi.wdeg().unwrap(), order);
        let phi = q.phi_at(24).unwrap();
        for point in &level.points {
            assert!(phi.eval(std::slice::from_ref(point)).unwrap().is_zero());
        }
    }
}

#[test]
fn quotient_maps_compose() {
    for (p, n) in [(2u64, 8u32), (3, 4)] {
        let level = level_ring(&format!("Z/{}", p * p).parse().unwrap(), &law("mult", p, n)).unwrap();
        assert!(stagewise_quotient(&level, p, 8).unwrap().equal());
    }
}

#[test]
fn norm_preserves_the_reference_structures() {
    let level = level_ring(&"Z/3".parse().unwrap(), &law("mult", 3, 4)).unwrap();
    let q = quotient_fgl(&level, 8).unwrap();
    for k in 1..=3 {
        let t = ThetaStructure::reference(&q.source, k);
        let out = rnorm(&t, &q, 6).unwrap();
        assert!(out.u.is_exact() && out.u.constant_term().is_one() && out.u.degree() == 0);
        if k < 3 {
            let d = delta_op(&t, 6).unwrap();
            assert_eq!(d.u.to_text(), ThetaStructure::reference(&q.source, k + 1).u.to_text());
        }
    }
}

#[test]
fn coordinate_norm_coherence_at_height_one() {
    for (p, n) in [(2u64, 8u32), (3, 6), (5, 4)] {
        let level = level_ring(&format!("Z/{p}").parse().unwrap(), &law("mult", p, n)).unwrap();
        let q = quotient_fgl(&level, 12).unwrap();
        let x = MPSeries::var(q.ring(), 1, 0);
        let report = coordinate_norm_coherence(&x, &q, &Psi::Identity, 12).unwrap();
        assert!(report.equal() && report.target_is_psi_source);
    }
}
