use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use slider_bench::{boxes, gradient, holes, slide_svg, text};
use slider_core::metrics::{levenshtein, symmetric_iou};
use slider_core::raster::telea_inpaint;
use slider_core::svg::{parse_slide_svg, serialize_slide_svg};

fn inpaint(c: &mut Criterion) {
    let mut g = c.benchmark_group("telea_inpaint");
    g.sample_size(10);
    for (w, h) in [(320u32, 180u32), (640, 360)] {
        let img = gradient(w, h);
        let mask = holes(w, h, 10);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{w}x{h}")), &(img, mask), |b, (img, mask)| {
            b.iter(|| telea_inpaint(black_box(img), black_box(mask), 5).unwrap())
        });
    }
    g.finish();
}

fn iou(c: &mut Criterion) {
    let mut g = c.benchmark_group("symmetric_iou");
    for n in [4usize, 31] {
        let (gt, pred) = (boxes(n, 0), boxes(n, 7));
        g.bench_with_input(BenchmarkId::from_parameter(n), &(gt, pred), |b, (gt, pred)| {
            b.iter(|| symmetric_iou(black_box(gt), black_box(pred)))
        });
    }
    g.finish();
}

fn edit_distance(c: &mut Criterion) {
    let mut g = c.benchmark_group("levenshtein");
    for len in [100usize, 1000] {
        let (a, b) = (text(len, 1), text(len, 2));
        g.bench_with_input(BenchmarkId::from_parameter(len), &(a, b), |bench, (a, b)| {
            bench.iter(|| levenshtein(black_box(a), black_box(b)))
        });
    }
    g.finish();
}

fn svg(c: &mut Criterion) {
    let src = slide_svg(8, 31);
    let doc = parse_slide_svg(&src).unwrap();
    c.bench_function("parse_slide_svg/8x31", |b| b.iter(|| parse_slide_svg(black_box(&src)).unwrap()));
    c.bench_function("serialize_slide_svg/8x31", |b| b.iter(|| serialize_slide_svg(black_box(&doc)).unwrap()));
}

criterion_group!(benches, inpaint, iou, edit_distance, svg);
criterion_main!(benches);
