//! Per-valence matrices for evaluating a patch with one extraordinary corner.
//!
//! For valence `N` the patch has `K = N + 6` control points. One refinement
//! maps them linearly onto the control points of the next, half-sized patch
//! around the extraordinary vertex (`A`, `K x K`) and onto the 12 control
//! points of each of the three regular sub-patches that fill the rest of the
//! triangle (`B_k`, `12 x K`). A point at distance `2^-n` from the
//! extraordinary corner is evaluated with `B_k A^(n-1)`. All matrices are read
//! off an actual refinement of a template disc, so they follow the same masks
//! as [`subdivide_once`](super::step::subdivide_once).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, Vector2};

use crate::error::{Error, Result};

use super::basis::LocalFrame;
use super::patch::gather_patch;
use super::step::{loop_beta, subdivide_once};
use super::template::cone_template;

pub const MAX_VALENCE: usize = 50;
/// Deepest ring used before clamping towards the extraordinary point.
pub const MAX_LEVEL: usize = 32;

#[derive(Debug)]
pub struct ValenceTable {
    pub valence: usize,
    /// `A`, kept for inspection and tests.
    pub subdivision: DMatrix<f64>,
    /// `B_k (A - 1 l^T)^n` for tile `k` and `n = 0..=MAX_LEVEL`.
    tiles: [Vec<DMatrix<f64>>; 3],
    frames: [LocalFrame; 3],
    /// Limit position of the extraordinary vertex in patch coordinates.
    limit: Vec<f64>,
}

impl ValenceTable {
    pub fn control_count(&self) -> usize {
        self.valence + 6
    }

    pub fn limit_weights(&self) -> &[f64] {
        &self.limit
    }

    /// Tile index, local frame and stacked matrix for a point whose scaled
    /// coordinates `(v, w)` satisfy `1/2 <= v + w <= 1`.
    pub(crate) fn tile(&self, v: f64, w: f64, level: usize) -> (&DMatrix<f64>, &LocalFrame) {
        let k = if v >= 0.5 {
            0
        } else if w >= 0.5 {
            1
        } else {
            2
        };
        (&self.tiles[k][level], &self.frames[k])
    }
}

/// Cached table for valence `n`, built on first use.
pub fn valence_table(n: usize) -> Result<Arc<ValenceTable>> {
    if !(3..=MAX_VALENCE).contains(&n) {
        return Err(Error::UnsupportedValence(n));
    }
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<ValenceTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().expect("valence cache poisoned").get(&n) {
        return Ok(t.clone());
    }
    let table = Arc::new(build(n));
    let mut w = cache.write().expect("valence cache poisoned");
    Ok(w.entry(n).or_insert(table).clone())
}

fn build(n: usize) -> ValenceTable {
    let disc = cone_template(n, 4);
    let (c, a, b) = (0, 1, 2);
    let coarse = gather_patch(&disc, c, a, b).expect("template patch");
    let k = coarse.len();
    let step = subdivide_once(&disc).expect("template is manifold");
    let fine = &step.refined;

    let edge = |x: usize, y: usize| step.edge_vertex(disc.edge_index(x, y).expect("template edge"));
    let (e_ca, e_ab, e_bc) = (edge(c, a), edge(a, b), edge(b, c));

    let rows_of = |points: &[usize]| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), k);
        for (i, &p) in points.iter().enumerate() {
            for (col, wgt) in step.matrix.row(p) {
                match coarse.iter().position(|&q| q == col) {
                    Some(j) => m[(i, j)] += wgt,
                    None => assert!(wgt == 0.0, "refined patch depends on a point outside the patch"),
                }
            }
        }
        m
    };

    let inner = gather_patch(fine, c, e_ca, e_bc).expect("inner patch");
    let subdivision = rows_of(&inner);

    let beta = loop_beta(n);
    let chi = 1.0 / (n as f64 + 3.0 / (8.0 * beta));
    let mut limit = vec![0.0; k];
    limit[0] = 1.0 - n as f64 * chi;
    for x in limit.iter_mut().skip(1).take(n) {
        *x = chi;
    }
    let mut deflated = subdivision.clone();
    for r in 0..k {
        for (c, l) in limit.iter().enumerate() {
            deflated[(r, c)] -= l;
        }
    }

    let tile_faces = [[a, e_ab, e_ca], [b, e_bc, e_ab], [e_ca, e_ab, e_bc]];
    let h = 0.5;
    let dom = |x: f64, y: f64| Vector2::new(x, y);
    let tile_domains = [
        [dom(1.0, 0.0), dom(h, h), dom(h, 0.0)],
        [dom(0.0, 1.0), dom(0.0, h), dom(h, h)],
        [dom(h, 0.0), dom(h, h), dom(0.0, h)],
    ];
    let tiles = tile_faces.map(|[q0, q1, q2]| {
        let pts = gather_patch(fine, q0, q1, q2).expect("regular sub-patch");
        let mut powers = Vec::with_capacity(MAX_LEVEL + 1);
        let mut cur = rows_of(&pts);
        for r in 0..12 {
            for (c, l) in limit.iter().enumerate() {
                cur[(r, c)] -= l;
            }
        }
        powers.push(cur.clone());
        for _ in 0..MAX_LEVEL {
            cur = &cur * &deflated;
            powers.push(cur.clone());
        }
        powers
    });
    let frames = tile_domains.map(LocalFrame::new);

    ValenceTable {
        valence: n,
        subdivision,
        tiles,
        frames,
        limit,
    }
}
