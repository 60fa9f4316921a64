use proptest::prelude::*;
use viscous_mhd::state::{EnergyForm, Primitive};
use viscous_mhd::thermo::EosModel;

fn primitive() -> impl Strategy<Value = Primitive> {
    (
        1e-3f64..1e3,
        prop::array::uniform3(-10.0f64..10.0),
        1e-3f64..1e3,
        prop::array::uniform3(-10.0f64..10.0),
        -5.0f64..5.0,
    )
        .prop_map(|(rho, u, p, b, phi)| Primitive { rho, u, p, b, phi })
}

fn gamma() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.4, 5.0 / 3.0, 2.0])
}

proptest! {
    #[test]
    fn primitive_round_trip(w in primitive(), g in gamma(), with_phi in any::<bool>()) {
        let form = if with_phi { EnergyForm::TotalWithPhi } else { EnergyForm::Total };
        let back = Primitive::from_conserved(&w.to_conserved(g, form), g, form).unwrap();
        let energy_scale = w.p / (g - 1.0) + 0.5 * w.rho * w.u.iter().map(|v| v * v).sum::<f64>() + 0.5 * w.b.iter().map(|v| v * v).sum::<f64>() + w.phi * w.phi;
        prop_assert!((back.rho - w.rho).abs() <= 1e-15 * w.rho);
        prop_assert!((back.p - w.p).abs() <= 1e-13 * energy_scale);
        for k in 0..3 {
            prop_assert!((back.u[k] - w.u[k]).abs() <= 1e-14 * w.u[k].abs().max(1.0));
            prop_assert_eq!(back.b[k], w.b[k]);
        }
    }

    #[test]
    fn pressure_and_entropy_are_consistent(rho in 1e-3f64..1e3, e in 1e-3f64..1e3, g in gamma()) {
        let eos = EosModel::new(g).unwrap();
        let p = eos.pressure(rho, e).unwrap();
        prop_assert!((p - (g - 1.0) * rho * e).abs() <= 1e-14 * p);
        // Entropy rises with internal energy at fixed density and falls with density at fixed energy.
        let s = eos.entropy_of(rho, e);
        prop_assert!(eos.entropy_of(rho, e * 1.01) > s);
        prop_assert!(eos.entropy_of(rho * 1.01, e) < s);
    }
}
