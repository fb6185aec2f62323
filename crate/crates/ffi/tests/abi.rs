use std::ffi::CStr;
use std::ptr;

use hsk_ffi::*;

fn build(backend: HskBackend, pts: &[f64], dim: usize) -> *mut HskSketch {
    let mut opts = hsk_build_options_default(backend, 0.1, (pts.len() / dim) as u64, 11);
    if backend == HskBackend::Add1d {
        opts.radius = 1.0;
    }
    let mut b = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(hsk_builder_new(&opts, &mut b), HskStatus::Ok);
        assert_eq!(hsk_builder_dim(b), dim);
        assert_eq!(hsk_builder_update_many(b, pts.as_ptr(), pts.len() / dim, dim), HskStatus::Ok);
        assert_eq!(hsk_builder_finish(b, &mut s), HskStatus::Ok);
    }
    s
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hsk_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn every_backend_builds_queries_and_reloads() {
    let line: Vec<f64> = (0..1000).map(|i| ((i * 389) % 1000) as f64 / 1000.0).collect();
    let plane: Vec<f64> = line.iter().flat_map(|&v| [v, (v * 7.0).fract()]).collect();
    for (backend, pts, theta) in [
        (HskBackend::Offline1d, &line, vec![1.0]),
        (HskBackend::Mult1d, &line, vec![1.0]),
        (HskBackend::Dyn1d, &line, vec![1.0]),
        (HskBackend::Add1d, &line, vec![1.0]),
        (HskBackend::Add2d, &plane, vec![0.6, 0.8]),
    ] {
        let dim = theta.len();
        let s = build(backend, pts, dim);
        unsafe {
            assert_eq!(hsk_sketch_len(s), 1000);
            assert_eq!(hsk_sketch_dim(s), dim);
            assert!(hsk_sketch_space_words(s) > 0);
            let mut got = HskBackend::Offline1d;
            assert_eq!(hsk_sketch_backend(s, &mut got), HskStatus::Ok);
            assert_eq!(got, backend);

            let exact: f64 = pts
                .chunks(dim)
                .map(|x| (0.7 - x.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>()).max(0.0))
                .sum::<f64>()
                / 1000.0;
            let mut est = 0.0;
            assert_eq!(hsk_sketch_query(s, theta.as_ptr(), dim, 0.7, &mut est), HskStatus::Ok);
            assert!((est - exact).abs() <= 0.1 * exact.max(1.0), "{backend:?}: {est} vs {exact}");
            let mut sum = 0.0;
            assert_eq!(hsk_sketch_query_sum(s, theta.as_ptr(), dim, 0.7, &mut sum), HskStatus::Ok);
            assert_eq!(sum / 1000.0, est);

            let mut need = 0usize;
            assert_eq!(hsk_sketch_serialize(s, ptr::null_mut(), 0, &mut need), HskStatus::BufferTooSmall);
            let mut buf = vec![0u8; need];
            let mut len = 0usize;
            assert_eq!(hsk_sketch_serialize(s, buf.as_mut_ptr(), buf.len(), &mut len), HskStatus::Ok);
            assert_eq!(len, need);
            let mut back = ptr::null_mut();
            assert_eq!(hsk_sketch_deserialize(buf.as_ptr(), len, &mut back), HskStatus::Ok);
            let mut est2 = 0.0;
            assert_eq!(hsk_sketch_query(back, theta.as_ptr(), dim, 0.7, &mut est2), HskStatus::Ok);
            assert_eq!(est.to_bits(), est2.to_bits());
            hsk_sketch_free(back);
            hsk_sketch_free(s);
        }
    }
}

#[test]
fn errors_are_reported_not_raised() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(hsk_builder_new(ptr::null(), &mut b), HskStatus::NullArgument);
        assert!(last_error().contains("opts"));

        let mut opts = hsk_build_options_default(HskBackend::Mult1d, 0.1, 10, 0);
        opts.p = 2;
        assert_eq!(hsk_builder_new(&opts, &mut b), HskStatus::InvalidParameter);
        opts.p = 3;
        assert_eq!(hsk_builder_new(&opts, &mut b), HskStatus::InvalidParameter);

        let opts = hsk_build_options_default(HskBackend::Add1d, 0.1, 10, 0);
        assert_eq!(hsk_builder_new(&opts, &mut b), HskStatus::Ok);
        let far = [5.0];
        assert_eq!(hsk_builder_update(b, far.as_ptr(), 1), HskStatus::OutOfDomain);
        let two = [0.1, 0.2];
        assert_eq!(hsk_builder_update(b, two.as_ptr(), 2), HskStatus::DimensionMismatch);
        assert_eq!(hsk_builder_update(b, ptr::null(), 1), HskStatus::NullArgument);
        let ok = [0.5];
        assert_eq!(hsk_builder_update(b, ok.as_ptr(), 1), HskStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(hsk_builder_finish(b, &mut s), HskStatus::Ok);

        let neg = [-1.0];
        let mut out = 0.0;
        assert_eq!(hsk_sketch_query(s, neg.as_ptr(), 1, 0.0, &mut out), HskStatus::Unsupported);
        assert_eq!(hsk_sketch_query(s, ok.as_ptr(), 1, 0.0, ptr::null_mut()), HskStatus::NullArgument);
        hsk_sketch_free(s);

        let junk = *b"HSK1junkjunk";
        let mut s = ptr::null_mut();
        assert_eq!(hsk_sketch_deserialize(junk.as_ptr(), junk.len(), &mut s), HskStatus::BadFormat);
        assert!(s.is_null());
        assert_eq!(hsk_sketch_deserialize(ptr::null(), 0, &mut s), HskStatus::BadFormat);

        hsk_sketch_free(ptr::null_mut());
        hsk_builder_free(ptr::null_mut());
        assert_eq!(hsk_sketch_len(ptr::null()), 0);
        assert!(!CStr::from_ptr(hsk_version()).to_bytes().is_empty());
    }
}
