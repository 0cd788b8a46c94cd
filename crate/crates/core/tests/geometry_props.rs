use fdtd25d::geometry::{
    build_contour, build_depth_map, center_depths, min_raw_nonzero, raw_edge_depths, smooth_edges,
    AreaFunction, AreaSample, CellRaster, CellType, DepthMap, GridSpec, AUTO_MIN_DEPTH_FRACTION,
};
use proptest::prelude::*;

const DS: f64 = 1e-3;
const OPEN: f64 = 0.05;

fn tube() -> impl Strategy<Value = (AreaFunction, GridSpec)> {
    (3usize..9, 20.0f64..60.0, prop::collection::vec(2.0f64..7.0, 9), any::<bool>()).prop_map(
        |(n, len_mm, radii_mm, even)| {
            let length = len_mm * DS;
            let samples = (0..n)
                .map(|k| {
                    let r = radii_mm[k] * DS;
                    AreaSample {
                        position: length * k as f64 / (n - 1) as f64,
                        area: std::f64::consts::PI * r * r,
                    }
                })
                .collect();
            let af = AreaFunction::new("random", samples).unwrap();
            let ny = 2 * (af.max_radius() / DS).ceil() as usize + 5 + usize::from(even);
            let nx = (length / DS).ceil() as usize + 6;
            (af, GridSpec::new(DS, nx, ny).unwrap())
        },
    )
}

fn build(af: &AreaFunction, grid: &GridSpec, floor: Option<f64>) -> (CellRaster, DepthMap) {
    let cells = build_contour(af, grid).unwrap();
    let map = build_depth_map(af, &cells, grid, floor, OPEN).unwrap();
    (cells, map)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(DS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn depth_map_is_mirror_symmetric((af, grid) in tube()) {
        // Vertical edge averaging looks upward only, which shifts the
        // smoothed d_y (and so the centre depth) half a cell; horizontal
        // depths and the raw chords are exact mirror images.
        let (cells, map) = build(&af, &grid, None);
        let (_, raw_y) = raw_edge_depths(&af, &cells, &grid, OPEN);
        let ny = grid.ny;
        for (i, j, c) in cells.indexed() {
            let m = ny - 1 - j;
            prop_assert_eq!(*c, cells[(i, m)]);
            prop_assert!(close(map.d_x[(i, j)], map.d_x[(i, m)]));
            if j + 2 <= ny && c.is_inside() && cells[(i, ny - 2 - j)].is_inside() {
                prop_assert!(close(raw_y[(i, j)], raw_y[(i, ny - 2 - j)]));
            }
        }
    }

    #[test]
    fn raw_chords_shrink_away_from_the_axis((af, grid) in tube()) {
        let cells = build_contour(&af, &grid).unwrap();
        let (raw_x, _) = raw_edge_depths(&af, &cells, &grid, OPEN);
        for i in 0..grid.nx {
            let mut inside: Vec<(f64, f64)> = (0..grid.ny)
                .filter(|&j| cells[(i, j)].is_inside())
                .map(|j| (grid.y_center(j).abs(), raw_x[(i, j)]))
                .collect();
            inside.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in inside.windows(2) {
                prop_assert!(w[1].1 <= w[0].1 + 1e-15);
            }
        }
    }

    #[test]
    fn center_depth_averages_unclamped_edges((af, grid) in tube(), floor_mm in 0.0f64..3.0) {
        let floor = floor_mm * DS;
        let (cells, map) = build(&af, &grid, Some(floor));
        let (raw_x, raw_y) = raw_edge_depths(&af, &cells, &grid, OPEN);
        let (sx, sy) = smooth_edges(&raw_x, &raw_y, &cells);
        let centers = center_depths(&sx, &sy, &cells, OPEN);
        for (i, j, c) in cells.indexed() {
            match c {
                CellType::Wall => prop_assert_eq!([map.d_bar[(i, j)], map.d_x[(i, j)], map.d_y[(i, j)]], [0.0; 3]),
                CellType::Outside => prop_assert_eq!([map.d_bar[(i, j)], map.d_x[(i, j)], map.d_y[(i, j)]], [OPEN; 3]),
                _ => {
                    let mean = 0.25 * (sx[(i, j)] + sx[(i - 1, j)] + sy[(i, j)] + sy[(i, j - 1)]);
                    prop_assert!(close(centers[(i, j)], mean));
                    prop_assert!(close(map.d_bar[(i, j)], mean.max(floor)));
                    prop_assert!(close(map.d_x[(i, j)], sx[(i, j)].max(floor)));
                    prop_assert!(close(map.d_y[(i, j)], sy[(i, j)].max(floor)));
                }
            }
        }
    }

    #[test]
    fn automatic_floor_bounds_every_inside_depth((af, grid) in tube()) {
        let (cells, map) = build(&af, &grid, None);
        let (raw_x, raw_y) = raw_edge_depths(&af, &cells, &grid, OPEN);
        let smallest = min_raw_nonzero(&raw_x, &raw_y, &cells).unwrap();
        prop_assert!(close(map.min_depth, AUTO_MIN_DEPTH_FRACTION * smallest));
        for (i, j, c) in cells.indexed() {
            if c.is_inside() {
                prop_assert!(map.d_bar[(i, j)] >= map.min_depth);
                prop_assert!(map.d_x[(i, j)] >= map.min_depth);
                prop_assert!(map.d_y[(i, j)] >= map.min_depth);
            }
        }
    }
}

#[test]
fn tube_length_sets_the_mouth_column() {
    for (len_mm, mouth) in [(8.2, 10), (20.0, 22), (20.4, 22), (20.6, 22), (21.2, 23)] {
        let af = AreaFunction::uniform(len_mm * DS, 2e-5).unwrap();
        let grid = GridSpec::new(DS, 30, 11).unwrap();
        let cells = build_contour(&af, &grid).unwrap();
        let axis = grid.axis_row();
        assert_eq!(cells[(0, axis)], CellType::Wall);
        assert_eq!(cells[(1, axis)], CellType::Excitation);
        assert_eq!(cells[(mouth, axis)], CellType::Open, "length {len_mm} mm");
        assert_eq!(cells[(mouth - 1, axis)], CellType::Air);
    }
}

#[test]
fn oversized_tube_is_rejected() {
    let af = AreaFunction::uniform(0.05, 3e-4).unwrap();
    assert!(build_contour(&af, &GridSpec::new(DS, 30, 40).unwrap()).is_err());
    assert!(build_contour(&af, &GridSpec::new(DS, 70, 8).unwrap()).is_err());
}
