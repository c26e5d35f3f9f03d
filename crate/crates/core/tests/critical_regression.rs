//! Frozen critical-number curves. The values were accepted only after an
//! independent dense (M, N_B) scan reproduced them; that scan is re-run on a
//! subset in the validation crate so a regression cannot silently re-baseline.

use qreading::critical::{critical_curve, SolverConfig};

const GRID: [f64; 7] = [0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.99];

/// `(N_S, [(m_int, m_real)])` over `GRID`.
const BASELINE: [(f64, [(u64, f64); 7]); 4] = [
    (0.01, [(67, 66.45650418363), (82, 81.35102262198), (108, 107.1208799878), (159, 158.8602265260), (315, 314.2954398482), (626, 625.2838239054), (6224, 6223.632460972)]),
    (0.1, [(7, 6.079790799516), (7, 6.555162221961), (9, 8.098194929657), (12, 11.32574325605), (22, 21.17176041234), (41, 40.95726749535), (398, 397.5536248106)]),
    (0.5, [(2, 1.848374223189), (2, 1.093659692878), (2, 1.163588493236), (2, 1.389586407469), (3, 2.188527678842), (4, 3.864404374423), (35, 34.42657157138)]),
    (1.0, [(2, 1.661707066396), (1, 0.5953822458530), (1, 0.5891566778515), (1, 0.5932985203516), (1, 0.7941288521053), (2, 1.275085320343), (11, 10.31738136105)]),
];

#[test]
fn curves_match_baseline() {
    let cfg = SolverConfig::default();
    for (n_s, expected) in BASELINE {
        let curve = critical_curve(n_s, &GRID, &cfg).unwrap();
        for (point, (m_int, m_real)) in curve.points.iter().zip(expected) {
            assert_eq!(point.m_int, Some(m_int), "N_S = {n_s}, r0 = {}", point.r0);
            let got = point.m_real.unwrap();
            assert!((got - m_real).abs() <= 1e-9 * m_real, "N_S = {n_s}, r0 = {}: {got} vs {m_real}", point.r0);
        }
    }
}
