use primebag::bench::{compare_representations, run_bench, BenchOp, BenchSpec, Distribution, Representation};

fn slope(op: BenchOp, repr: Representation, sizes: &[u64], distribution: Distribution) -> f64 {
    let spec = BenchSpec::new(op, repr, sizes.to_vec(), distribution, 17);
    let report = run_bench(&spec).unwrap();
    assert!(report.is_complete(), "{:?}", report.series[0].notes);
    report.series[0].slope.unwrap()
}

fn slopes(op: BenchOp, sizes: &[u64]) -> (f64, f64) {
    let report = compare_representations(op, sizes, 23).unwrap();
    assert!(report.is_complete());
    let s = |r| report.series_for(r).unwrap().slope.unwrap();
    (s(Representation::Pb), s(Representation::Positional))
}

#[test]
fn pb_mul_and_gcd_scale_better_than_positional() {
    let ladder = [16, 32, 64, 128, 256];
    let (pb, pos) = slopes(BenchOp::Mul, &ladder);
    assert!(pb < 1.2 && pos > 1.7, "mul: pb {pb}, positional {pos}");
    let (pb, pos) = slopes(BenchOp::Gcd, &ladder);
    assert!(pb < pos, "gcd: pb {pb}, positional {pos}");
    assert!(pb < 1.2, "gcd: pb {pb}");
}

#[test]
fn pb_factoring_scales_better_than_positional() {
    let (pb, pos) = slopes(BenchOp::Factor, &[8, 12, 16, 20]);
    assert!(pb < pos, "factor: pb {pb}, positional {pos}");
}

#[test]
fn conversion_cost_outgrows_bag_factoring() {
    let sizes = [4, 6, 8, 10, 12];
    let convert = slope(BenchOp::NaturalToPb, Representation::Positional, &sizes, Distribution::WorstCasePrime);
    let scan = slope(BenchOp::Factor, Representation::Pb, &sizes, Distribution::WorstCasePrime);
    assert!(convert > scan, "natural_to_pb {convert} vs factor_pb {scan}");
}

#[test]
fn bag_primality_ignores_magnitude() {
    let s = slope(BenchOp::Primality, Representation::Pb, &[3, 5, 7, 9], Distribution::RandomNDigitNatural);
    assert!(s.abs() <= 0.1, "{s}");
}

#[test]
fn pb_addition_costs_more_than_positional() {
    let report = compare_representations(BenchOp::Add, &[6, 9], 29).unwrap();
    let at = |r, i: usize| report.series_for(r).unwrap().points[i].median_counter;
    for i in 0..2 {
        let (pb, pos) = (at(Representation::Pb, i), at(Representation::Positional, i));
        assert!(pb > 4.0 * pos, "pb {pb}, positional {pos}");
    }
}

#[test]
fn decbag_products_grow_quadratically_before_normalizing() {
    let s = slope(BenchOp::Mul, Representation::DecBag, &[16, 32, 64, 128, 256], Distribution::RandomPb);
    assert!(s > 1.7, "{s}");
    let m = slope(BenchOp::Mul, Representation::MulBag, &[16, 32, 64, 128, 256], Distribution::RandomPb);
    assert!(m < 1.2, "{m}");
}
