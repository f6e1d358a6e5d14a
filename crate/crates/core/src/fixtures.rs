//! Named spaces used throughout tests, examples and the CLI.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::canopy::{canopy_from_cover, canopy_from_group_action, canopy_of_parts, Canopy};
use crate::fintop::{ContinuousMap, FinSpace};
use crate::grpquot::GroupAction;
use crate::pointset::PointSet;

/// Sierpiński space: `U_1 = {1}`, `U_0 = {0,1}`.
pub fn sierp() -> FinSpace {
    FinSpace::from_table("SIERP", &[("0", vec!["0", "1"]), ("1", vec!["1"])]).expect("valid")
}

/// Two open points joined by a closed middle point.
pub fn line3() -> FinSpace {
    FinSpace::from_table(
        "LINE3",
        &[
            ("l", vec!["l"]),
            ("m", vec!["l", "m", "r"]),
            ("r", vec!["r"]),
        ],
    )
    .expect("valid")
}

/// Khalimsky chain on `0..n`: odd points open, even points closed.
pub fn khalimsky(n: usize) -> FinSpace {
    let minopen = (0..n)
        .map(|i| {
            if i % 2 == 1 {
                PointSet::singleton(i)
            } else {
                (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect()
            }
        })
        .collect();
    FinSpace::from_minopens(format!("K{n}"), minopen).expect("valid")
}

pub fn k5() -> FinSpace {
    khalimsky(5)
}

pub fn p9() -> FinSpace {
    line3().product(&line3()).expect("9 points").renamed("P9")
}

pub fn p25() -> FinSpace {
    k5().product(&k5()).expect("25 points").renamed("P25")
}

/// Random space on `n` points: a random preorder, transitively closed.
pub fn random_space(n: usize, density: f64, rng: &mut impl Rng) -> FinSpace {
    let mut minopen: Vec<PointSet> = (0..n).map(PointSet::singleton).collect();
    for x in 0..n {
        for y in 0..n {
            if x != y && rng.gen_bool(density) {
                minopen[x].insert(y);
            }
        }
    }
    // transitive closure
    loop {
        let mut changed = false;
        for x in 0..n {
            let grown = minopen[x]
                .iter()
                .fold(minopen[x], |acc, y| acc.union(minopen[y]));
            if grown != minopen[x] {
                minopen[x] = grown;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    FinSpace::from_minopens(format!("rand{n}"), minopen).expect("preorder")
}

/// Deterministic stream of random spaces with sizes in `sizes`.
pub fn random_spaces(seed: u64, count: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<FinSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            let density = rng.gen_range(0.05..0.35);
            random_space(n, density, &mut rng)
        })
        .collect()
}

/// Khalimsky circle on `n` points (`n` even, at least 4).
pub fn khalimsky_circle(n: usize) -> FinSpace {
    assert!(n >= 4 && n % 2 == 0);
    let minopen = (0..n)
        .map(|i| {
            if i % 2 == 1 {
                PointSet::singleton(i)
            } else {
                PointSet::from_indices([(i + n - 1) % n, i, (i + 1) % n])
            }
        })
        .collect();
    FinSpace::from_minopens(format!("C{n}"), minopen).expect("valid")
}

/// Point rotation `(a,b) ↦ (4−a, 4−b)` on P25.
pub fn rotation_p25() -> GroupAction {
    let p = p25();
    let k = k5();
    let rot = (0..25)
        .map(|i| p.product_index(&k, 4 - i / 5, 4 - i % 5))
        .collect();
    GroupAction::generated("rot", p, &[("s", rot)]).expect("involution")
}

/// Coordinate swap `(a,b) ↦ (b,a)` on P9.
pub fn swap_p9() -> GroupAction {
    let p = p9();
    let l = line3();
    let swap = (0..9).map(|i| p.product_index(&l, i % 3, i / 3)).collect();
    GroupAction::generated("swap", p, &[("s", swap)]).expect("involution")
}

/// Half turn on the eight-point circle; free, with quotient the four-point circle.
pub fn halfturn_c8() -> GroupAction {
    let c = khalimsky_circle(8);
    let turn = (0..8).map(|i| (i + 4) % 8).collect();
    GroupAction::generated("halfturn", c, &[("s", turn)]).expect("involution")
}

/// Mirror `(a,b) ↦ (4−a, b)` on P25. Its fixed set `{2}×K5` is closed and
/// contains no open point.
pub fn reflection_p25() -> GroupAction {
    let p = p25();
    let k = k5();
    let mirror = (0..25).map(|i| p.product_index(&k, 4 - i / 5, i % 5)).collect();
    GroupAction::generated("mirror", p, &[("s", mirror)]).expect("involution")
}

/// `f = id` and `g` swapping the coordinates of the three points strictly
/// above the diagonal of P9. Pointwise in the same orbit, but no single
/// group element works near `(m,m)`.
pub fn mock_twist_pair() -> (ContinuousMap, ContinuousMap) {
    let p = p9();
    let l = line3();
    let twist: Vec<usize> = (0..9)
        .map(|i| {
            let (a, b) = (i / 3, i % 3);
            if a < b {
                p.product_index(&l, b, a)
            } else {
                i
            }
        })
        .collect();
    let f = ContinuousMap::identity(&p);
    let g = ContinuousMap::new(p.clone(), p, twist).expect("twist is continuous");
    (f, g)
}

fn minopen_cover(space: &FinSpace) -> Canopy {
    let opens: Vec<PointSet> = (0..space.len()).map(|x| space.minopen(x)).collect();
    canopy_from_cover(space, &opens).expect("minimal opens are open")
}

fn cover(space: &FinSpace, sets: &[&[&str]]) -> Canopy {
    let opens: Vec<PointSet> = sets.iter().map(|s| space.set_of(s).expect("labels")).collect();
    canopy_from_cover(space, &opens).expect("open cover")
}

/// Twenty canopies mixing open covers, disjoint parts and group actions.
pub fn fixture_canopies() -> Vec<Canopy> {
    let l = line3();
    let s = sierp();
    let mut out = vec![
        cover(&l, &[&["l", "m", "r"], &["r"]]),
        cover(&l, &[&["l"], &["l", "m", "r"]]),
        cover(&l, &[&["l", "m", "r"]]),
        cover(&l, &[&["l"], &["r"], &["l", "m", "r"]]),
        cover(&s, &[&["0", "1"], &["1"]]),
        minopen_cover(&s),
        minopen_cover(&l),
        minopen_cover(&k5()),
        minopen_cover(&p9()),
        minopen_cover(&khalimsky_circle(4)),
        minopen_cover(&khalimsky_circle(6)),
        canopy_of_parts(&[s.clone(), l.clone()]).expect("small"),
        canopy_of_parts(&[FinSpace::point(), FinSpace::point()]).expect("small"),
        canopy_from_group_action(&rotation_p25()),
        canopy_from_group_action(&swap_p9()),
        canopy_from_group_action(&halfturn_c8()),
        canopy_from_group_action(&GroupAction::trivial(&l)),
        minopen_cover(&khalimsky_circle(8)),
    ];
    for space in random_spaces(7, 2, 3..=5) {
        out.push(minopen_cover(&space));
    }
    out
}
