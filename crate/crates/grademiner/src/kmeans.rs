//! Lloyd's k-means iteration over real-valued feature vectors,
//! minimizing the squared-error objective.
//!
//! The pipeline clusters the 1-D GPA axis, but everything here works for
//! any dimension. All randomness flows through a seeded generator, so a
//! fit is a pure function of its inputs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum KMeansError {
    #[error("k = {k} exceeds the {distinct} distinct input points")]
    TooFewDistinctPoints { distinct: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("assignment index {index} outside [0, {k})")]
    InvalidAssignmentIndex { index: usize, k: usize },
    #[error("point coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
}

/// A point in feature space. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T: Real> {
    coords: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self, KMeansError> {
        if coords.is_empty() {
            return Err(KMeansError::EmptyInput("point coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(KMeansError::NonFiniteCoordinate);
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Squared Euclidean distance between two points of equal dimension.
pub fn squared_distance<T: Real>(a: &Point<T>, b: &Point<T>) -> T {
    a.coords
        .iter()
        .zip(&b.coords)
        .fold(T::zero(), |acc, (x, y)| {
            let d = *x - *y;
            acc + d * d
        })
}

/// Clustering parameters. `k` clusters, deterministic initialization from
/// `seed`, and the termination rule: stop once the largest per-coordinate
/// centroid movement is at most `epsilon`, or after `max_iters` rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig<T: Real> {
    k: usize,
    seed: u64,
    max_iters: usize,
    epsilon: T,
}

impl<T: Real> KMeansConfig<T> {
    pub fn new(k: usize, seed: u64) -> Result<Self, KMeansError> {
        if k == 0 {
            return Err(KMeansError::InvalidConfig("k must be >= 1".into()));
        }
        Ok(Self {
            k,
            seed,
            max_iters: 100,
            epsilon: T::from_f64_const(1e-9),
        })
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Result<Self, KMeansError> {
        if max_iters == 0 {
            return Err(KMeansError::InvalidConfig("max_iters must be >= 1".into()));
        }
        self.max_iters = max_iters;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Result<Self, KMeansError> {
        if !epsilon.is_finite() || epsilon < T::zero() {
            return Err(KMeansError::InvalidConfig(
                "epsilon must be finite and >= 0".into(),
            ));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn max_iters(&self) -> usize {
        self.max_iters
    }
    pub fn epsilon(&self) -> T {
        self.epsilon
    }
}

/// Result of a k-means fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T: Real> {
    centroids: Vec<Point<T>>,
    assignment: Vec<usize>,
    iterations: usize,
    sse: T,
    converged: bool,
    sse_trace: Vec<T>,
}

impl<T: Real> ClusterModel<T> {
    pub fn centroids(&self) -> &[Point<T>] {
        &self.centroids
    }
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    pub fn sse(&self) -> T {
        self.sse
    }
    pub fn converged(&self) -> bool {
        self.converged
    }
    /// Objective value recorded after each assign+recompute round.
    pub fn sse_trace(&self) -> &[T] {
        &self.sse_trace
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.centroids.len()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

fn check_dims<T: Real>(points: &[Point<T>]) -> Result<usize, KMeansError> {
    let dim = points
        .first()
        .ok_or(KMeansError::EmptyInput("points"))?
        .dim();
    for p in points {
        if p.dim() != dim {
            return Err(KMeansError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    Ok(dim)
}

/// Selects `k` distinct points as initial centroids, uniformly sampled
/// with the configured seed.
pub fn init_centroids<T: Real>(
    points: &[Point<T>],
    cfg: &KMeansConfig<T>,
) -> Result<Vec<Point<T>>, KMeansError> {
    check_dims(points)?;
    // distinct points in first-occurrence order
    let mut distinct: Vec<&Point<T>> = Vec::new();
    for p in points {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    if distinct.len() < cfg.k {
        return Err(KMeansError::TooFewDistinctPoints {
            distinct: distinct.len(),
            k: cfg.k,
        });
    }
    // partial Fisher-Yates over the distinct list; hand-rolled so the
    // sequence depends only on the seed, not on library internals
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut indices: Vec<usize> = (0..distinct.len()).collect();
    for i in 0..cfg.k {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    Ok(indices[..cfg.k]
        .iter()
        .map(|&i| distinct[i].clone())
        .collect())
}

/// Assigns every point to its nearest centroid by squared Euclidean
/// distance. Ties go to the lowest centroid index.
pub fn assign_points<T: Real>(
    points: &[Point<T>],
    centroids: &[Point<T>],
) -> Result<Vec<usize>, KMeansError> {
    if centroids.is_empty() {
        return Err(KMeansError::EmptyInput("centroids"));
    }
    let dim = check_dims(centroids)?;
    let mut assignment = Vec::with_capacity(points.len());
    for p in points {
        if p.dim() != dim {
            return Err(KMeansError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        let mut best = 0usize;
        let mut best_dist = squared_distance(p, &centroids[0]);
        for (i, c) in centroids.iter().enumerate().skip(1) {
            let d = squared_distance(p, c);
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        assignment.push(best);
    }
    Ok(assignment)
}

/// Recomputes each cluster's centroid as the mean of its members.
///
/// An empty cluster is relocated to the point farthest (by squared
/// distance) from its currently assigned centroid; empty clusters are
/// repaired in ascending index order and a relocated point is not chosen
/// twice.
pub fn recompute_centroids<T: Real>(
    points: &[Point<T>],
    assignment: &[usize],
    k: usize,
) -> Result<Vec<Point<T>>, KMeansError> {
    let dim = check_dims(points)?;
    if assignment.len() != points.len() {
        return Err(KMeansError::DimensionMismatch {
            expected: points.len(),
            found: assignment.len(),
        });
    }
    for &a in assignment {
        if a >= k {
            return Err(KMeansError::InvalidAssignmentIndex { index: a, k });
        }
    }

    let mut sums = vec![vec![T::zero(); dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment) {
        for (s, c) in sums[a].iter_mut().zip(p.coords()) {
            *s = *s + *c;
        }
        counts[a] += 1;
    }

    let mut centroids: Vec<Option<Point<T>>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(sum, &n)| {
            (n > 0).then(|| {
                let n = T::from_count(n);
                Point {
                    coords: sum.into_iter().map(|s| s / n).collect(),
                }
            })
        })
        .collect();

    if counts.contains(&0) {
        // distance of each point to its own (non-empty, hence Some) centroid
        let mut dists: Vec<T> = points
            .iter()
            .zip(assignment)
            .map(|(p, &a)| {
                centroids[a]
                    .as_ref()
                    .map(|c| squared_distance(p, c))
                    .unwrap_or_else(T::zero)
            })
            .collect();
        for slot in centroids.iter_mut() {
            if slot.is_some() {
                continue;
            }
            let mut far = 0usize;
            for i in 1..points.len() {
                if dists[i] > dists[far] {
                    far = i;
                }
            }
            *slot = Some(points[far].clone());
            dists[far] = T::zero();
        }
    }

    Ok(centroids
        .into_iter()
        .map(|c| c.expect("all clusters repaired"))
        .collect())
}

/// Sum of squared Euclidean distances from each point to its assigned
/// centroid.
pub fn sse<T: Real>(
    points: &[Point<T>],
    centroids: &[Point<T>],
    assignment: &[usize],
) -> Result<T, KMeansError> {
    if assignment.len() != points.len() {
        return Err(KMeansError::DimensionMismatch {
            expected: points.len(),
            found: assignment.len(),
        });
    }
    let mut total = T::zero();
    for (p, &a) in points.iter().zip(assignment) {
        let c = centroids
            .get(a)
            .ok_or(KMeansError::InvalidAssignmentIndex {
                index: a,
                k: centroids.len(),
            })?;
        if c.dim() != p.dim() {
            return Err(KMeansError::DimensionMismatch {
                expected: p.dim(),
                found: c.dim(),
            });
        }
        total = total + squared_distance(p, c);
    }
    Ok(total)
}

/// Runs Lloyd's iteration: assign points, recompute centroids, repeat
/// until the centroids stop moving (or `max_iters` is hit). Deterministic
/// given the seed.
pub fn fit<T: Real>(
    points: &[Point<T>],
    cfg: &KMeansConfig<T>,
) -> Result<ClusterModel<T>, KMeansError> {
    let mut centroids = init_centroids(points, cfg)?;
    let mut converged = false;
    let mut iterations = 0;
    let mut sse_trace = Vec::new();

    for it in 1..=cfg.max_iters {
        iterations = it;
        let assignment = assign_points(points, &centroids)?;
        let new_centroids = recompute_centroids(points, &assignment, cfg.k)?;
        let movement = centroids
            .iter()
            .zip(&new_centroids)
            .flat_map(|(old, new)| old.coords().iter().zip(new.coords()))
            .fold(T::zero(), |m, (o, n)| m.max((*o - *n).abs()));
        centroids = new_centroids;
        sse_trace.push(sse(points, &centroids, &assignment)?);
        if movement <= cfg.epsilon {
            converged = true;
            break;
        }
    }

    // settle on an assignment consistent with the final centroids
    let assignment = assign_points(points, &centroids)?;
    let final_sse = sse(points, &centroids, &assignment)?;
    Ok(ClusterModel {
        centroids,
        assignment,
        iterations,
        sse: final_sse,
        converged,
        sse_trace,
    })
}
