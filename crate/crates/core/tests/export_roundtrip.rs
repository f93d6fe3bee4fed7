use bilateral::compare::{effort_curve, linspace, EffortSettings};
use bilateral::domain::{HourglassGrid, IntervalGrid};
use bilateral::export::{read_effort_csv, write_effort_csv, write_kernel_csv, write_trajectory_csv};
use bilateral::kernel_rd::{rd_kernel_explicit, RdPlant};
use bilateral::sim::{simulate_rd, RdControl, SimSettings};

#[test]
fn effort_curve_survives_csv() {
    let curve = effort_curve(&linspace(0.5, 5.0, 10), &EffortSettings::default()).unwrap();
    let mut buf = Vec::new();
    write_effort_csv(&mut buf, &curve).unwrap();
    let back = read_effort_csv(buf.as_slice()).unwrap();
    assert_eq!(back.points, curve.points);
    assert!(back.crossover_literal.is_none());
}

#[test]
fn effort_csv_rejects_foreign_header() {
    assert!(read_effort_csv("a,b,c,d\n1,2,3,4\n".as_bytes()).is_err());
}

#[test]
fn kernel_csv_values_are_exact() {
    let grid = HourglassGrid::new(IntervalGrid::new(1.0, 21).unwrap());
    let k = rd_kernel_explicit(&RdPlant::constant(1.0, 7.0, 1.0).unwrap(), &grid).unwrap();
    let mut buf = Vec::new();
    write_kernel_csv(&mut buf, &k.field).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    let base = *grid.base();
    let mut count = 0;
    for row in r.deserialize::<(f64, f64, f64)>() {
        let (x, xi, v) = row.unwrap();
        let i = (0..21).find(|&i| base.node(i) == x).unwrap();
        let j = (0..21).find(|&j| base.node(j) == xi).unwrap();
        assert_eq!(k.field.get(i, j), v);
        count += 1;
    }
    // row p carries 2|p| + 1 nodes, p = -10..=10
    assert_eq!(count, 21 + 4 * 55);
}

#[test]
fn trajectory_long_format() {
    let grid = IntervalGrid::new(1.0, 11).unwrap();
    let plant = RdPlant::constant(1.0, 1.0, 1.0).unwrap();
    let u0: Vec<f64> = grid.nodes().iter().map(|x| 1.0 - x * x).collect();
    let mut s = SimSettings::new(Some(0.01), 0.1);
    s.record_every = 5;
    let t = simulate_rd(&plant, &grid, &RdControl::OpenLoop, &u0, &s).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &t).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["t", "x", "field", "value"]);
    let rows: Vec<(f64, f64, String, f64)> = r.deserialize().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), t.times.len() * 11);
    assert_eq!(t.times.len(), 3);
    assert_eq!(rows[5].3, u0[5]);
}
