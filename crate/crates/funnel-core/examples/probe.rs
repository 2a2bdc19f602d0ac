use funnel_core::funnel::*;
fn main() {
    let n = 120;
    let arc = GraphArc {
        axis: 0,
        samples: (0..=n).map(|k| {
            let s = std::f64::consts::PI * k as f64 / n as f64;
            (s, vec![s.sin()])
        }).collect(),
    };
    let (field, y0) = arc_funnel(&arc).unwrap();
    let ip = InnerParams::new(0.0, 2.0).with_ensemble(600).with_dt(2.5e-4);
    let pts = funnel_inner(&field, &y0, &ip).unwrap();
    let graph: Vec<[f64;2]> = (0..=400).map(|k| { let s = std::f64::consts::PI*k as f64/400.0; [s, s.sin()] }).collect();
    let d_cov = graph.iter().map(|q| pts.iter().map(|p| (p[0]-q[0]).hypot(p[1]-q[1])).fold(f64::INFINITY, f64::min)).fold(0.0f64, f64::max);
    let d_near = pts.iter().map(|p| graph.iter().map(|q| (p[0]-q[0]).hypot(p[1]-q[1])).fold(f64::INFINITY, f64::min)).fold(0.0f64, f64::max);
    println!("sin arc @dt=2.5e-4: coverage {d_cov:.4}, nearness {d_near:.4}");
}
