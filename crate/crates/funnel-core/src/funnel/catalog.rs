//! The named field catalog: one entry per built-in field kind, with a
//! canonical initial point and horizon. Connectivity of the outer estimate
//! is exercised across the whole catalog.

use super::eye::{closing_flow, BumpProfile};
use crate::field::{
    BumpUnionField, FieldKind, GridSamples, Profile1D, SampledPath, SupportBox, TimeField,
};
use std::sync::Arc;

pub struct CatalogEntry {
    pub name: &'static str,
    pub field: TimeField,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
}

fn entry(name: &'static str, field: TimeField, y0: Vec<f64>) -> CatalogEntry {
    let (t0, t1) = (field.support().t0, field.support().t1);
    CatalogEntry {
        name,
        field,
        y0,
        t0,
        t1,
    }
}

/// Ten catalog fields covering every built-in kind.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();

    out.push(entry(
        "zero",
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 4.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap(),
        vec![0.25],
    ));
    out.push(entry(
        "constant",
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 8.0, 1.0).unwrap(),
            FieldKind::Constant { v: vec![1.0] },
        )
        .unwrap(),
        vec![0.0],
    ));
    out.push(entry(
        "abs_sqrt",
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 9.0, 2.0).unwrap(),
            FieldKind::AbsPow {
                axis: 0,
                c: 2.0,
                p: 0.5,
                origin: 0.0,
            },
        )
        .unwrap(),
        vec![0.0],
    ));
    out.push(entry(
        "abs_pow_two_thirds",
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 9.0, 2.0).unwrap(),
            FieldKind::AbsPow {
                axis: 0,
                c: 1.5,
                p: 2.0 / 3.0,
                origin: 0.0,
            },
        )
        .unwrap(),
        vec![0.0],
    ));
    out.push(entry(
        "collapse",
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 3.0, 0.5).unwrap(),
            FieldKind::Collapse {
                axis: 0,
                rate: 2.2,
                target: 0.0,
            },
        )
        .unwrap(),
        vec![0.7],
    ));
    out.push(entry(
        "shear",
        TimeField::new(
            2,
            SupportBox::symmetric(0.0, 1.0, 2, 4.0, 0.5).unwrap(),
            FieldKind::Shear {
                graph_axis: 0,
                profiles: vec![
                    None,
                    Some(
                        Profile1D::from_fn(0.0, 1.0, 32, 0.25, |s| {
                            (std::f64::consts::PI * s).sin()
                        })
                        .unwrap(),
                    ),
                ],
            },
        )
        .unwrap(),
        vec![0.4, 0.0],
    ));
    out.push(entry(
        "closing_flow",
        closing_flow(&BumpProfile::default()).unwrap(),
        vec![0.4, 0.6],
    ));
    // rotation generator as a closure-backed field
    let rotation = {
        let eval = move |_t: f64, p: &[f64], out: &mut [f64]| {
            out[0] = -p[1];
            out[1] = p[0];
        };
        TimeField::new(
            2,
            SupportBox::symmetric(0.0, 1.0, 2, 4.0, 0.5).unwrap(),
            FieldKind::Dynamic(Arc::new(eval)),
        )
        .unwrap()
    };
    out.push(entry("rotation", rotation, vec![0.5, 0.0]));
    // averaged three-slab union field over two inert 1D fields
    let zero1 = TimeField::new(
        1,
        SupportBox::symmetric(0.0, 1.0, 1, 4.0, 0.5).unwrap(),
        FieldKind::Zero,
    )
    .unwrap();
    let path0 = SampledPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![0.0]]).unwrap();
    out.push(entry(
        "bump_union",
        TimeField::new(
            2,
            SupportBox::new(0.0, 1.0, vec![-4.0, -1.5], vec![4.0, 4.5], 0.5).unwrap(),
            FieldKind::BumpUnion(Box::new(BumpUnionField {
                f: zero1.clone(),
                g: zero1,
                a: path0.clone(),
                b: path0,
            })),
        )
        .unwrap(),
        vec![0.0, 0.5],
    ));
    // grid interpolation of a gentle swirl
    let grid = {
        let dims = vec![17usize, 17];
        let t_steps = 5usize;
        let mut values = Vec::new();
        for _ in 0..t_steps {
            for i in 0..17 {
                for j in 0..17 {
                    let x = -2.0 + 4.0 * i as f64 / 16.0;
                    let y = -2.0 + 4.0 * j as f64 / 16.0;
                    let w = (1.0 - (x * x + y * y) / 8.0).max(0.0);
                    values.push(-y * w * 0.5);
                    values.push(x * w * 0.5);
                }
            }
        }
        TimeField::new(
            2,
            SupportBox::new(0.0, 1.0, vec![-2.0, -2.0], vec![2.0, 2.0], 0.4).unwrap(),
            FieldKind::Grid(Box::new(GridSamples {
                t_steps,
                dims,
                values,
            })),
        )
        .unwrap()
    };
    out.push(entry("grid_swirl", grid, vec![0.8, 0.0]));

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funnel::estimate::{
        bracketing_holds, estimate_funnel, kneser_check, InnerParams, OuterParams,
    };

    #[test]
    fn catalog_has_ten_fields() {
        assert_eq!(catalog().len(), 10);
    }

    #[test]
    fn catalog_fields_have_compact_support() {
        for e in catalog() {
            e.field
                .check_support(5)
                .unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn kneser_connectivity_across_catalog() {
        for e in catalog() {
            let ip = InnerParams::new(e.t0, e.t1).with_ensemble(120).with_dt(2e-3);
            let mut op = OuterParams::new(e.t0, e.t1);
            op.dt = 2e-3;
            op.h = if e.field.dim() == 1 { 0.02 } else { 0.12 };
            let est = estimate_funnel(&e.field, &e.y0, &ip, &op)
                .unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert!(kneser_check(&est), "{}: outer cells disconnected", e.name);
            assert!(bracketing_holds(&est), "{}: inner escapes outer", e.name);
        }
    }
}
