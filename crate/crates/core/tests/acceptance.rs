//! Acceptance suite: one test per release criterion, each printing a
//! `acceptance: <name> ... pass` line and required to finish within its
//! 60-second budget. Run with `cargo test --test acceptance` (add
//! `-- --nocapture` to see the lines).

mod common;

use std::time::Instant;

use catmorph::categorical::{
    close_i, close_i_logged, dilate_i, dilate_i_logged, erode_i, erode_i_logged, open_i,
    open_i_logged, preorder_leq,
};
use catmorph::geodesic::{dijkstra_distance, fmm_distance, DomainMask};
use catmorph::io::{
    annotator_bias_recipe, denoise_recipe, read_catd, read_catd_from, run_pipeline, write_catd_to,
    CatdImage,
};
use catmorph::protected::{
    protected_close_logged, protected_dilate, protected_dilate_logged, protected_erode,
    protected_erode_logged, protected_open_logged, ProtectionMode, ProtectionSpec,
};
use catmorph::{
    baselines, CategoricalImage, Error, Label, LabelImage, Norm, StructuringElement,
};
use common::{
    connected_components, max_abs_diff, oracle, random_labels, random_simplex_image, rng,
};
use rand::Rng;

fn criterion(name: &str, body: impl FnOnce()) {
    let t0 = Instant::now();
    body();
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "{name}: suite exceeded its 60 s budget ({dt:.1}s)");
    println!("acceptance: {name} ... pass ({dt:.2}s)");
}

fn ball(r: f64, norm: Norm) -> StructuringElement {
    StructuringElement::ball(2, r, norm).unwrap()
}

#[test]
fn criterion_1_algebraic_laws() {
    criterion("1 algebraic laws (adjunction, compositions, idempotence)", || {
        let mut rng = rng(1001);
        let norms = [Norm::CityBlock, Norm::Chessboard];
        let radii = [1.0, 2.0, 3.0];
        let mut adjunction_true = 0;
        for trial in 0..200 {
            let channels = 3 + trial % 3;
            let i = trial % channels;
            let se = ball(radii[trial % 3], norms[trial % 2]);
            let f = random_simplex_image(&mut rng, &[8, 8], channels, i);
            let g = match trial % 3 {
                // comparable pair: g dominates dilate(f) on channel i
                0 => dilate_i(&f, i, &ball(3.0, norms[trial % 2])).unwrap(),
                1 => random_simplex_image(&mut rng, &[8, 8], channels, i),
                _ => erode_i(&f, i, &se).unwrap(),
            };

            // adjunction equivalence, exact on channel i
            let lhs = preorder_leq(&dilate_i(&f, i, &se).unwrap(), &g, i).unwrap();
            let rhs = preorder_leq(&f, &erode_i(&g, i, &se).unwrap(), i).unwrap();
            assert_eq!(lhs, rhs, "adjunction mismatch at trial {trial}");
            adjunction_true += lhs as usize;

            // erosion of dilation dominates, dilation of erosion is dominated
            let ed = erode_i(&dilate_i(&f, i, &se).unwrap(), i, &se).unwrap();
            assert!(preorder_leq(&f, &ed, i).unwrap(), "trial {trial}");
            let de = dilate_i(&erode_i(&f, i, &se).unwrap(), i, &se).unwrap();
            assert!(preorder_leq(&de, &f, i).unwrap(), "trial {trial}");

            // dilate-erode-dilate collapses to dilate, on all channels
            let d = dilate_i(&f, i, &se).unwrap();
            let ded = dilate_i(&erode_i(&d, i, &se).unwrap(), i, &se).unwrap();
            let diff = max_abs_diff(&ded, &d);
            assert!(diff <= 1e-7, "trial {trial}: collapse diff {diff}");

            // opening and closing are idempotent
            let o1 = open_i(&f, i, &se).unwrap();
            let o2 = open_i(&o1, i, &se).unwrap();
            assert!(max_abs_diff(&o1, &o2) <= 1e-7, "trial {trial}");
            let c1 = close_i(&f, i, &se).unwrap();
            let c2 = close_i(&c1, i, &se).unwrap();
            assert!(max_abs_diff(&c1, &c2) <= 1e-7, "trial {trial}");
        }
        assert!(adjunction_true >= 20, "true branch barely exercised");
    });
}

/// KNOWN RED. Composing erosions over growing balls reproduces the direct
/// erosion exactly on the operated channel (asserted below, every trial),
/// but not on the redistribution channels: at pixels still saturated after
/// the first pass, the second pass splits mass by the maxima of already
/// per-pixel-normalized redistributions, and normalized maxima do not
/// compose. An independent per-pixel transcription of the operations shows
/// the same deviation, so this is a property of the definitions, not of the
/// engine. The final assertion states the criterion as specified and is
/// expected to fail; it reports how often and by how much.
#[test]
fn criterion_2_erosion_semigroup() {
    criterion("2 erosion semigroup over growing balls", || {
        let mut rng = rng(2002);
        let mut failures = 0usize;
        let mut worst = 0.0f64;
        let trials = 100;
        for trial in 0..trials {
            let channels = 3 + trial % 2;
            let i = trial % channels;
            let norm = [Norm::CityBlock, Norm::Chessboard][trial % 2];
            let (r, rho) = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)][trial % 4];
            let f = if trial % 10 == 0 {
                // saturated plateau much wider than the radii
                let mut data = Vec::new();
                for _y in 0..8usize {
                    for x in 0..8usize {
                        let mut p = vec![0.0; channels];
                        if x == 7 {
                            p[(i + 1) % channels] = 0.25;
                            p[(i + 2) % channels] = 0.75;
                        } else {
                            p[i] = 1.0;
                        }
                        data.extend(p);
                    }
                }
                CategoricalImage::new(vec![8, 8], channels, data).unwrap()
            } else {
                random_simplex_image(&mut rng, &[8, 8], channels, i)
            };
            let two_step = erode_i(
                &erode_i(&f, i, &ball(r, norm)).unwrap(),
                i,
                &ball(rho, norm),
            )
            .unwrap();
            let one_step = erode_i(&f, i, &ball(r + rho, norm)).unwrap();

            // the operated channel composes exactly, always
            let ci = |img: &CategoricalImage, pixel: usize| img.pixel(pixel)[i];
            for pixel in 0..64 {
                assert_eq!(
                    ci(&two_step, pixel),
                    ci(&one_step, pixel),
                    "trial {trial}: operated channel differs at {pixel}"
                );
            }

            let diff = max_abs_diff(&two_step, &one_step);
            if diff > 1e-7 {
                failures += 1;
                worst = worst.max(diff);
            }
        }
        assert!(
            failures == 0,
            "full-image semigroup failed in {failures}/{trials} trials (worst deviation \
             {worst:.3e}); the operated channel composed exactly in every trial — the \
             deviation is confined to the freed-mass redistribution at pixels still \
             saturated after the first pass, where normalized weights do not compose"
        );
    });
}

#[test]
fn criterion_3_brute_force_oracle_equivalence() {
    criterion("3 brute-force oracle equivalence", || {
        let mut rng = rng(3003);
        for trial in 0..60 {
            let channels = 3 + trial % 3;
            let i = trial % channels;
            let norm = [Norm::CityBlock, Norm::Chessboard, Norm::Euclidean][trial % 3];
            let r = [1.0, 2.0][trial % 2];
            let f = random_simplex_image(&mut rng, &[8, 8], channels, i);
            let se = ball(r, norm);

            let got = dilate_i(&f, i, &se).unwrap();
            let want = oracle::dilate_i(&f, i, r, norm);
            for (a, b) in got.data().iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9, "dilate trial {trial}: {a} vs {b}");
            }
            let got = erode_i(&f, i, &se).unwrap();
            let want = oracle::erode_i(&f, i, r, norm);
            for (a, b) in got.data().iter().zip(&want) {
                assert!((a - b).abs() <= 1e-9, "erode trial {trial}: {a} vs {b}");
            }
        }
    });
}

#[test]
fn criterion_4_crisp_consistency() {
    criterion("4 crisp consistency with single-category label morphology", || {
        let mut rng = rng(4004);
        for trial in 0..100 {
            let categories = 3 + trial % 2;
            let i = (trial % categories) as u32;
            let labels = random_labels(&mut rng, &[8, 8], categories);
            let one_hot = CategoricalImage::one_hot(&labels, categories).unwrap();

            // dilation agrees everywhere, under every norm
            let norm = [Norm::CityBlock, Norm::Chessboard, Norm::Euclidean][trial % 3];
            let r = [1.0, 2.0][trial % 2];
            let se = ball(r, norm);
            let fuzzy = dilate_i(&one_hot, i as usize, &se).unwrap().argmax_labels();
            let crisp = baselines::nary_dilate(&labels, i, &se).unwrap();
            assert_eq!(fuzzy.data(), crisp.data(), "dilate trial {trial}");

            // erosion agrees at every unambiguous pixel (Euclidean balls,
            // where "nearest" means the same thing on both sides)
            let se = ball(r, Norm::Euclidean);
            let fuzzy = erode_i(&one_hot, i as usize, &se).unwrap().argmax_labels();
            let pixelwise = oracle::nary_erode_pixelwise(&labels, i, r, Norm::Euclidean);
            for (pixel, expected) in pixelwise.iter().enumerate() {
                if let Ok(label) = expected {
                    assert_eq!(
                        fuzzy.get(pixel),
                        Label::Cat(*label),
                        "erode trial {trial} pixel {pixel}"
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_5_simplex_preservation_and_drift() {
    criterion("5 simplex preservation, rebalance drift under 1e-9", || {
        let mut rng = rng(5005);
        for trial in 0..40 {
            let channels = 3 + trial % 3;
            let i = trial % channels;
            let norm = [Norm::CityBlock, Norm::Chessboard, Norm::Euclidean][trial % 3];
            let se = ball([1.0, 2.0][trial % 2], norm);
            let f = random_simplex_image(&mut rng, &[8, 8], channels, i);
            let spec = ProtectionSpec::new(&[(i + 1) % channels]).mode(
                [ProtectionMode::Literal, ProtectionMode::Capacity][trial % 2],
            );
            let outputs = [
                dilate_i_logged(&f, i, &se).unwrap(),
                erode_i_logged(&f, i, &se).unwrap(),
                open_i_logged(&f, i, &se).unwrap(),
                close_i_logged(&f, i, &se).unwrap(),
                protected_dilate_logged(&f, i, &se, &spec).unwrap(),
                protected_erode_logged(&f, i, &se, &spec).unwrap(),
                protected_open_logged(&f, i, &se, &spec).unwrap(),
                protected_close_logged(&f, i, &se, &spec).unwrap(),
            ];
            for (op, (img, drift)) in outputs.iter().enumerate() {
                assert!(
                    img.validate(1e-6).is_ok(),
                    "trial {trial} op {op} violates the simplex"
                );
                assert!(*drift <= 1e-9, "trial {trial} op {op} drift {drift}");
            }
        }
    });
}

#[test]
fn criterion_6_protection_laws() {
    criterion("6 protection laws", || {
        let mut rng = rng(6006);

        // empty protection reduces to the unprotected operations
        for trial in 0..16 {
            let channels = 3 + trial % 2;
            let i = trial % channels;
            let norm = [Norm::CityBlock, Norm::Chessboard][trial % 2];
            let se = ball(1.0 + (trial % 2) as f64, norm);
            let f = random_simplex_image(&mut rng, &[7, 7], channels, i);
            for mode in [ProtectionMode::Literal, ProtectionMode::Capacity] {
                let spec = ProtectionSpec::new(&[]).mode(mode);
                let pd = protected_dilate(&f, i, &se, &spec).unwrap();
                let ud = dilate_i(&f, i, &se).unwrap();
                assert!(max_abs_diff(&pd, &ud) <= 1e-6, "trial {trial} dilate");
                let pe = protected_erode(&f, i, &se, &spec).unwrap();
                let ue = erode_i(&f, i, &se).unwrap();
                assert!(max_abs_diff(&pe, &ue) <= 1e-6, "trial {trial} erode");
            }
        }

        // protected channels are bit-identical on arbitrary images
        for trial in 0..8 {
            let f = random_simplex_image(&mut rng, &[7, 7], 4, 0);
            let se = ball(2.0, Norm::CityBlock);
            let spec = ProtectionSpec::new(&[1, 3]).mode(
                [ProtectionMode::Literal, ProtectionMode::Capacity][trial % 2],
            );
            for img in [
                protected_dilate(&f, 0, &se, &spec).unwrap(),
                protected_erode(&f, 0, &se, &spec).unwrap(),
            ] {
                for pixel in 0..f.pixel_count() {
                    assert_eq!(img.pixel(pixel)[1], f.pixel(pixel)[1]);
                    assert_eq!(img.pixel(pixel)[3], f.pixel(pixel)[3]);
                }
            }
        }

        // crisp-wall fixtures match the graph-geodesic oracle exactly, and
        // the two protection modes agree there
        crisp_wall_fixture_checks(&mut rng);
    });
}

/// Crisp one-hot fixtures with protected walls: expected outputs are derived
/// from an independent Bellman-Ford geodesic oracle on the wall-free domain.
fn crisp_wall_fixture_checks(rng: &mut rand_chacha::ChaCha8Rng) {
    // channels: 0 operated, 1 replacement, 2 protected wall
    for _trial in 0..10 {
        let (h, w) = (9usize, 9usize);
        let mut labels = vec![1u32; h * w];
        // vertical wall with a single gap
        let gap = rng.gen_range(0..h);
        for y in 0..h {
            if y != gap {
                labels[y * w + 4] = 2;
            }
        }
        // operated seeds on the left side
        for _ in 0..6 {
            let y = rng.gen_range(0..h);
            let x = rng.gen_range(0..4);
            labels[y * w + x] = 0;
        }
        let f = CategoricalImage::one_hot(
            &LabelImage::from_labels(vec![h, w], 3, labels.clone()).unwrap(),
            3,
        )
        .unwrap();
        let r = 3.0;
        let se = ball(r, Norm::CityBlock);
        let spec = ProtectionSpec::new(&[2]);

        let walls: Vec<bool> = labels.iter().map(|&l| l == 2).collect();
        let seeds: Vec<usize> = (0..h * w).filter(|&p| labels[p] == 0).collect();
        let dist_to_seed = bellman_geodesic(&walls, (h, w), &seeds);

        let dilated = protected_dilate(&f, 0, &se, &spec).unwrap();
        for pixel in 0..h * w {
            let expected: [f64; 3] = if labels[pixel] == 2 {
                [0.0, 0.0, 1.0]
            } else if dist_to_seed[pixel] <= r {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            assert_eq!(dilated.pixel(pixel), expected, "dilate pixel {pixel}");
        }

        let eroded = protected_erode(&f, 0, &se, &spec).unwrap();
        let others: Vec<usize> = (0..h * w).filter(|&p| labels[p] == 1).collect();
        let dist_to_other = bellman_geodesic(&walls, (h, w), &others);
        for pixel in 0..h * w {
            let expected: [f64; 3] = match labels[pixel] {
                2 => [0.0, 0.0, 1.0],
                1 => [0.0, 1.0, 0.0],
                _ => {
                    if dist_to_other[pixel] <= r {
                        [0.0, 1.0, 0.0]
                    } else {
                        [1.0, 0.0, 0.0]
                    }
                }
            };
            assert_eq!(eroded.pixel(pixel), expected, "erode pixel {pixel}");
        }

        // capacity mode agrees on crisp walls
        let cap_spec = ProtectionSpec::new(&[2]).mode(ProtectionMode::Capacity);
        let cap_d = protected_dilate(&f, 0, &se, &cap_spec).unwrap();
        assert!(max_abs_diff(&cap_d, &dilated) <= 1e-6);
        let cap_e = protected_erode(&f, 0, &se, &cap_spec).unwrap();
        assert!(max_abs_diff(&cap_e, &eroded) <= 1e-6);
    }

    // symmetric two-sided replacement splits the freed mass evenly
    let labels = vec![1u32, 0, 2];
    let f = CategoricalImage::one_hot(
        &LabelImage::from_labels(vec![3], 4, labels).unwrap(),
        4,
    )
    .unwrap();
    let se = StructuringElement::ball(1, 1.0, Norm::CityBlock).unwrap();
    let spec = ProtectionSpec::new(&[3]);
    let eroded = protected_erode(&f, 0, &se, &spec).unwrap();
    assert_eq!(eroded.pixel(1), &[0.0, 0.5, 0.5, 0.0]);

    // a protected wall hides the nearer replacement entirely
    let labels = vec![1u32, 3, 0, 0, 0, 2];
    let f = CategoricalImage::one_hot(
        &LabelImage::from_labels(vec![6], 4, labels).unwrap(),
        4,
    )
    .unwrap();
    let se = StructuringElement::ball(1, 4.0, Norm::CityBlock).unwrap();
    let eroded = protected_erode(&f, 0, &se, &spec).unwrap();
    assert_eq!(eroded.pixel(2), &[0.0, 0.0, 1.0, 0.0]);
    assert_eq!(eroded.pixel(1), &[0.0, 0.0, 0.0, 1.0]);
}

/// Exact 4-connected geodesic distances by repeated relaxation; the
/// acceptance oracle for city-block geodesic balls.
fn bellman_geodesic(walls: &[bool], (h, w): (usize, usize), seeds: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; h * w];
    for &s in seeds {
        if !walls[s] {
            dist[s] = 0.0;
        }
    }
    for _ in 0..h * w {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let idx = y * w + x;
                if walls[idx] {
                    continue;
                }
                let mut best = dist[idx];
                if y > 0 && !walls[idx - w] {
                    best = best.min(dist[idx - w] + 1.0);
                }
                if y + 1 < h && !walls[idx + w] {
                    best = best.min(dist[idx + w] + 1.0);
                }
                if x > 0 && !walls[idx - 1] {
                    best = best.min(dist[idx - 1] + 1.0);
                }
                if x + 1 < w && !walls[idx + 1] {
                    best = best.min(dist[idx + 1] + 1.0);
                }
                if best < dist[idx] {
                    dist[idx] = best;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

#[test]
fn criterion_7_geodesic_solver() {
    criterion("7 marching solver vs graph oracle and Euclidean bound", || {
        let mut rng = rng(7007);

        // reachability identical to the graph solver on masked domains
        for trial in 0..50 {
            let mut mask: Vec<bool> = (0..32 * 32)
                .map(|_| rng.gen_bool(0.55 + 0.4 * (trial as f64 / 50.0)))
                .collect();
            let seed = rng.gen_range(0..32 * 32);
            mask[seed] = true;
            let mask = DomainMask::new(vec![32, 32], mask).unwrap();
            let dj = dijkstra_distance(&[seed], &mask, Norm::Euclidean).unwrap();
            let fm = fmm_distance(&[seed], &mask).unwrap();
            for (pixel, (a, b)) in dj.data().iter().zip(fm.data()).enumerate() {
                assert_eq!(
                    a.is_finite(),
                    b.is_finite(),
                    "trial {trial}: reachability differs at {pixel}"
                );
            }
        }

        // frozen empty-domain error bound against exact Euclidean distance
        let n = 64usize;
        let mask = DomainMask::full(vec![n, n]).unwrap();
        let c = (n / 2) as i64;
        let seed = (n / 2) * n + n / 2;
        let d = fmm_distance(&[seed], &mask).unwrap();
        for y in 0..n {
            for x in 0..n {
                let exact =
                    (((y as i64 - c).pow(2) + (x as i64 - c).pow(2)) as f64).sqrt();
                let err = (d.get(y * n + x) - exact).abs();
                let bound = 0.2 * (1.0f64).max(exact / 10.0);
                assert!(
                    err <= bound,
                    "({y},{x}): err {err:.4} exceeds bound {bound:.4}"
                );
            }
        }
    });
}

#[test]
fn criterion_8_workflow_reconstructions() {
    criterion("8 workflow reconstructions (denoise, biased growth)", || {
        let tmp = tempfile::tempdir().unwrap();

        // single-pixel misclassifications vanish under opening
        let (h, w) = (16usize, 16usize);
        let mut labels = vec![0u32; h * w];
        for y in 3..10 {
            for x in 3..10 {
                labels[y * w + x] = 1;
            }
        }
        for &(y, x) in &[(13usize, 13usize), (1, 13), (13, 1)] {
            labels[y * w + x] = 1;
        }
        for y in 0..h {
            labels[y * w + 15] = 2;
        }
        let noisy = CategoricalImage::one_hot(
            &LabelImage::from_labels(vec![h, w], 3, labels).unwrap(),
            3,
        )
        .unwrap();
        assert_eq!(connected_components(&noisy.argmax_labels(), 1), 4);

        let spec = denoise_recipe(1, 1.0, Norm::CityBlock);
        let outdir = tmp.path().join("denoise");
        let report =
            run_pipeline(&spec, &CatdImage::Categorical(noisy.clone()), &outdir).unwrap();
        let cleaned = read_catd(&report.final_path).unwrap();
        let cleaned = cleaned.as_categorical().unwrap();
        let seg = cleaned.argmax_labels();
        assert_eq!(connected_components(&seg, 1), 1, "noise components remain");
        assert_eq!(seg.get(5 * w + 5), Label::Cat(1), "main blob lost");
        assert!(report.log_path.exists());

        // biased growth: the inner class gains area with the radius while
        // the background stays bit-identical. Concentric layout: background,
        // a ring of class 1, a wide band of class 3, class 2 in the middle,
        // with an uncertain 2/3 boundary.
        let (h, w) = (28usize, 28usize);
        let mut data = Vec::with_capacity(h * w * 4);
        for y in 0..h {
            for x in 0..w {
                let ring = (2..26).contains(&y) && (2..26).contains(&x);
                let band = (5..23).contains(&y) && (5..23).contains(&x);
                let core = (12..16).contains(&y) && (12..16).contains(&x);
                let fuzz = (11..17).contains(&y) && (11..17).contains(&x) && !core;
                let pixel: [f64; 4] = if core {
                    [0.0, 0.0, 1.0, 0.0]
                } else if fuzz {
                    [0.0, 0.0, 0.5, 0.5] // annotators disagree here
                } else if band {
                    [0.0, 0.0, 0.0, 1.0]
                } else if ring {
                    [0.0, 1.0, 0.0, 0.0]
                } else {
                    [1.0, 0.0, 0.0, 0.0]
                };
                data.extend(pixel);
            }
        }
        let annotated = CategoricalImage::new(vec![h, w], 4, data).unwrap();
        let count_inner = |img: &CategoricalImage| {
            img.argmax_labels()
                .data()
                .iter()
                .filter(|&&l| l == Label::Cat(2))
                .count()
        };
        let baseline = count_inner(&annotated);
        let mut previous = baseline;
        for radius in [1.0, 2.0, 3.0] {
            let spec = annotator_bias_recipe(2, 1, 0, radius, Norm::CityBlock);
            let outdir = tmp.path().join(format!("bias-r{radius}"));
            let report =
                run_pipeline(&spec, &CatdImage::Categorical(annotated.clone()), &outdir)
                    .unwrap();
            let grown = read_catd(&report.final_path).unwrap();
            let grown = grown.as_categorical().unwrap();
            let count = count_inner(grown);
            assert!(
                count > previous,
                "inner-class area must grow with the radius ({count} vs {previous})"
            );
            previous = count;
            for pixel in 0..h * w {
                assert_eq!(
                    grown.pixel(pixel)[0],
                    annotated.pixel(pixel)[0],
                    "background channel changed at {pixel}"
                );
            }
        }
    });
}

#[test]
fn criterion_9_container_round_trip() {
    criterion("9 container round trip and corruption handling", || {
        let mut rng = rng(9009);
        for trial in 0..100 {
            let channels = 2 + trial % 4;
            let shape = match trial % 3 {
                0 => vec![1 + trial % 7],
                1 => vec![3, 5],
                _ => vec![2, 3, 2],
            };
            // values generated in f32 so the on-disk narrowing is lossless
            let n: usize = shape.iter().product();
            let mut data = Vec::with_capacity(n * channels);
            for _ in 0..n {
                let raw: Vec<f64> = (0..channels)
                    .map(|_| -(rng.gen_range(1e-6..1.0f64)).ln())
                    .collect();
                let sum: f64 = raw.iter().sum();
                data.extend(raw.iter().map(|v| (v / sum) as f32 as f64));
            }
            let img = CatdImage::Categorical(
                CategoricalImage::new(shape, channels, data).unwrap(),
            );
            let mut bytes = Vec::new();
            write_catd_to(&img, &mut bytes).unwrap();
            let back = read_catd_from(&mut bytes.as_slice()).unwrap();
            assert_eq!(back.values(), img.values(), "trial {trial}");
            let mut bytes2 = Vec::new();
            write_catd_to(&back, &mut bytes2).unwrap();
            assert_eq!(bytes, bytes2, "trial {trial}: bytes differ");
        }

        // corrupted headers produce the dedicated errors
        let img = CatdImage::Categorical(
            CategoricalImage::filled(vec![2, 2], &[0.5, 0.5]).unwrap(),
        );
        let mut good = Vec::new();
        write_catd_to(&img, &mut good).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[1] = b'X';
        assert!(matches!(
            read_catd_from(&mut bad_magic.as_slice()).unwrap_err(),
            Error::BadMagic { .. }
        ));

        let mut bad_version = good.clone();
        bad_version[4] = 3;
        assert!(matches!(
            read_catd_from(&mut bad_version.as_slice()).unwrap_err(),
            Error::UnsupportedVersion(3)
        ));

        let mut bad_kind = good.clone();
        bad_kind[8] = 9;
        assert!(matches!(
            read_catd_from(&mut bad_kind.as_slice()).unwrap_err(),
            Error::UnknownPayloadKind(9)
        ));

        let mut truncated = good.clone();
        truncated.truncate(good.len() - 5);
        assert!(matches!(
            read_catd_from(&mut truncated.as_slice()).unwrap_err(),
            Error::TruncatedPayload { .. }
        ));

        let mut padded = good.clone();
        padded.extend_from_slice(&[0; 4]);
        assert!(matches!(
            read_catd_from(&mut padded.as_slice()).unwrap_err(),
            Error::TruncatedPayload { .. }
        ));

        // payload violating the simplex is rejected with the pixel index
        let mut invalid = good.clone();
        let payload_start = good.len() - 16 * 2;
        for b in &mut invalid[payload_start..payload_start + 8] {
            *b = 0;
        }
        assert!(matches!(
            read_catd_from(&mut invalid.as_slice()).unwrap_err(),
            Error::SimplexViolation { pixel: 0, .. }
        ));
    });
}
