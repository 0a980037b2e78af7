use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::neighbors::DistanceSpace;
use super::{synthetic_count, SampleError, SampledMatrix, SamplerConfig, SamplerWarning};
use crate::features::FeatureMatrix;
use crate::rng::{stream, tag};

const KMEANS_ITERATIONS: usize = 50;

type Synthetic = (Vec<f64>, (usize, usize));

fn minority_rows(m: &FeatureMatrix) -> Vec<usize> {
    (0..m.n_rows()).filter(|&i| m.labels()[i] == 1).collect()
}

/// Rows still to generate, or `None` when the target is already met.
fn deficit(m: &FeatureMatrix, proportion: f64) -> Option<usize> {
    let (majority, minority) = m.class_counts();
    let g = synthetic_count(minority, majority, proportion);
    (g > 0).then_some(g as usize)
}

fn nothing_to_do(m: &FeatureMatrix) -> SampledMatrix {
    let (majority, minority) = m.class_counts();
    let mut out = SampledMatrix::unchanged(m);
    out.warnings
        .push(SamplerWarning::NothingToDo { minority, majority });
    out
}

fn clamp_k(requested: usize, available: usize, warnings: &mut Vec<SamplerWarning>) -> usize {
    let used = requested.min(available);
    if used < requested {
        log::warn!("k_neighbors clamped from {requested} to {used}");
        warnings.push(SamplerWarning::KNeighborsClamped { requested, used });
    }
    used
}

/// Appends `generated` as minority rows after the originals.
fn assemble(
    m: &FeatureMatrix,
    generated: Vec<Synthetic>,
    warnings: Vec<SamplerWarning>,
) -> Result<SampledMatrix, SampleError> {
    let n = m.n_rows();
    let existing: HashSet<&str> = m.sample_ids().iter().map(String::as_str).collect();
    let mut prefix = String::from("~syn");
    while existing.iter().any(|id| id.starts_with(&prefix)) {
        prefix.insert(0, '~');
    }
    let mut values = m.values().to_vec();
    let mut labels = m.labels().to_vec();
    let mut ids = m.sample_ids().to_vec();
    let mut parents = vec![None; n];
    for (i, (row, p)) in generated.into_iter().enumerate() {
        values.extend(row);
        labels.push(1);
        ids.push(format!("{prefix}{i:06}"));
        parents.push(Some(p));
    }
    let total = labels.len();
    let matrix = FeatureMatrix::from_flat(values, m.feature_names().to_vec(), labels, ids)?;
    Ok(SampledMatrix {
        matrix,
        synthetic_mask: (0..total).map(|i| i >= n).collect(),
        parents,
        source_index: (0..total).map(|i| (i < n).then_some(i)).collect(),
        removed_ids: Vec::new(),
        warnings,
    })
}

fn interpolate_row(m: &FeatureMatrix, a: usize, b: usize, lambda: f64) -> Vec<f64> {
    m.row(a)
        .iter()
        .zip(m.row(b))
        .map(|(x, y)| x + lambda * (y - x))
        .collect()
}

/// Minority-neighbour lists for each member, within `members`.
fn neighbour_lists(space: &DistanceSpace, members: &[usize], k: usize) -> Vec<Vec<usize>> {
    members.iter().map(|&i| space.knn(i, members, k)).collect()
}

/// `g` SMOTE rows: a uniformly chosen member interpolated towards one of
/// its `k` nearest fellow members.
fn smote_rows(
    m: &FeatureMatrix,
    space: &DistanceSpace,
    members: &[usize],
    k: usize,
    g: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Synthetic> {
    let nbrs = neighbour_lists(space, members, k);
    (0..g)
        .map(|_| {
            let pick = rng.random_range(0..members.len());
            let a = members[pick];
            let b = if nbrs[pick].is_empty() {
                a
            } else {
                nbrs[pick][rng.random_range(0..nbrs[pick].len())]
            };
            let lambda: f64 = rng.random();
            (interpolate_row(m, a, b, lambda), (a, b))
        })
        .collect()
}

/// Splits `total` proportionally to `weights` (largest remainder; ties go
/// to the lower index).
pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (quotas[b] - quotas[b].floor())
            .total_cmp(&(quotas[a] - quotas[a].floor()))
            .then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

pub fn smote(m: &FeatureMatrix, cfg: &SamplerConfig) -> Result<SampledMatrix, SampleError> {
    cfg.validate()?;
    let minority = minority_rows(m);
    if minority.len() < 2 {
        return Err(SampleError::TooFewMinority {
            have: minority.len(),
            need: 2,
        });
    }
    let Some(g) = deficit(m, cfg.proportion) else {
        return Ok(nothing_to_do(m));
    };
    let mut warnings = Vec::new();
    let k = clamp_k(cfg.k_neighbors, minority.len() - 1, &mut warnings);
    let space = DistanceSpace::new(m, cfg.standardize);
    let mut rng = stream(cfg.seed, tag::SAMPLER, 0);
    let rows = smote_rows(m, &space, &minority, k, g, &mut rng);
    assemble(m, rows, warnings)
}

/// SMOTE with per-point allocation proportional to the share of majority
/// rows among each minority point's `k` nearest neighbours.
pub fn adasyn(m: &FeatureMatrix, cfg: &SamplerConfig) -> Result<SampledMatrix, SampleError> {
    cfg.validate()?;
    let minority = minority_rows(m);
    if minority.len() < 2 {
        return Err(SampleError::TooFewMinority {
            have: minority.len(),
            need: 2,
        });
    }
    let Some(g) = deficit(m, cfg.proportion) else {
        return Ok(nothing_to_do(m));
    };
    let mut warnings = Vec::new();
    let k = clamp_k(cfg.k_neighbors, minority.len() - 1, &mut warnings);
    let space = DistanceSpace::new(m, cfg.standardize);
    let mut rng = stream(cfg.seed, tag::SAMPLER, 0);

    let all: Vec<usize> = (0..m.n_rows()).collect();
    let k_all = cfg.k_neighbors.min(m.n_rows() - 1);
    let difficulty: Vec<f64> = minority
        .iter()
        .map(|&i| {
            let nn = space.knn(i, &all, k_all);
            nn.iter().filter(|&&j| m.labels()[j] == 0).count() as f64 / k_all as f64
        })
        .collect();
    if difficulty.iter().all(|&r| r == 0.0) {
        let rows = smote_rows(m, &space, &minority, k, g, &mut rng);
        return assemble(m, rows, warnings);
    }
    let alloc = largest_remainder(&difficulty, g);
    let nbrs = neighbour_lists(&space, &minority, k);
    let mut rows = Vec::with_capacity(g);
    for (pos, &count) in alloc.iter().enumerate() {
        let a = minority[pos];
        for _ in 0..count {
            let b = nbrs[pos][rng.random_range(0..nbrs[pos].len())];
            let lambda: f64 = rng.random();
            rows.push((interpolate_row(m, a, b, lambda), (a, b)));
        }
    }
    assemble(m, rows, warnings)
}

/// Lloyd's k-means with k-means++ seeding; returns a cluster index per
/// point. Empty clusters keep their previous centre.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, iterations: usize) -> Vec<usize> {
    let n = points.len();
    if n == 0 || k == 0 {
        return vec![0; n];
    }
    let d2 =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    let mut rng = stream(seed, tag::KMEANS, 0);
    let mut centres: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].clone()];
    let mut chosen = vec![false; n];
    while centres.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| {
                centres
                    .iter()
                    .map(|c| d2(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if acc > target && *w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[next] = true;
        centres.push(points[next].clone());
    }
    let nearest = |p: &[f64], centres: &[Vec<f64>]| -> usize {
        let mut best = (f64::INFINITY, 0);
        for (c, centre) in centres.iter().enumerate() {
            let d = d2(p, centre);
            if d < best.0 {
                best = (d, c);
            }
        }
        best.1
    };
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centres)).collect();
    for _ in 0..iterations {
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centres[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centres)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    assign
}

/// SMOTE inside k-means clusters of the minority class, with the number of
/// new rows per cluster proportional to its size.
pub fn cluster_smote(m: &FeatureMatrix, cfg: &SamplerConfig) -> Result<SampledMatrix, SampleError> {
    cfg.validate()?;
    let minority = minority_rows(m);
    let need = cfg.n_clusters.max(2);
    if minority.len() < need {
        return Err(SampleError::TooFewMinority {
            have: minority.len(),
            need,
        });
    }
    let Some(g) = deficit(m, cfg.proportion) else {
        return Ok(nothing_to_do(m));
    };
    let space = DistanceSpace::new(m, cfg.standardize);
    let points: Vec<Vec<f64>> = minority.iter().map(|&i| space.point(i).to_vec()).collect();
    let assign = kmeans(&points, cfg.n_clusters, cfg.seed, KMEANS_ITERATIONS);
    let mut clusters: Vec<Vec<usize>> = (0..cfg.n_clusters)
        .map(|c| {
            minority
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(&i, _)| i)
                .collect()
        })
        .filter(|members: &Vec<usize>| members.len() >= 2)
        .collect();
    if clusters.is_empty() {
        clusters.push(minority.clone());
    }
    let sizes: Vec<f64> = clusters.iter().map(|c| c.len() as f64).collect();
    let alloc = largest_remainder(&sizes, g);
    let mut warnings = Vec::new();
    let mut rng = stream(cfg.seed, tag::SAMPLER, 0);
    let mut rows = Vec::with_capacity(g);
    for (members, &count) in clusters.iter().zip(&alloc) {
        let k = clamp_k(cfg.k_neighbors, members.len() - 1, &mut warnings);
        rows.extend(smote_rows(m, &space, members, k, count, &mut rng));
    }
    warnings.dedup();
    assemble(m, rows, warnings)
}

/// Mutual nearest-neighbour pairs `(a, b)`, `a < b`, of opposite classes.
pub fn tomek_links(m: &FeatureMatrix, standardize: bool) -> Vec<(usize, usize)> {
    let n = m.n_rows();
    if n < 2 {
        return Vec::new();
    }
    let space = DistanceSpace::new(m, standardize);
    let all: Vec<usize> = (0..n).collect();
    let nn: Vec<usize> = (0..n).map(|i| space.knn(i, &all, 1)[0]).collect();
    (0..n)
        .filter(|&a| nn[a] > a && nn[nn[a]] == a && m.labels()[a] != m.labels()[nn[a]])
        .map(|a| (a, nn[a]))
        .collect()
}

/// SMOTE followed by removal of both members of every Tomek link, unless
/// that would leave a class empty.
pub fn smote_tomek(m: &FeatureMatrix, cfg: &SamplerConfig) -> Result<SampledMatrix, SampleError> {
    let s = smote(m, cfg)?;
    let links = tomek_links(&s.matrix, cfg.standardize);
    let (mut neg, mut pos) = s.matrix.class_counts();
    let mut drop = vec![false; s.matrix.n_rows()];
    let mut warnings = s.warnings.clone();
    for (a, b) in links {
        if neg <= 1 || pos <= 1 {
            warnings.push(SamplerWarning::TomekRemovalSkipped { a, b });
            continue;
        }
        drop[a] = true;
        drop[b] = true;
        neg -= 1;
        pos -= 1;
    }
    if !drop.contains(&true) {
        return Ok(SampledMatrix { warnings, ..s });
    }
    let keep: Vec<usize> = (0..drop.len()).filter(|&i| !drop[i]).collect();
    Ok(SampledMatrix {
        matrix: s.matrix.select_rows(&keep),
        synthetic_mask: keep.iter().map(|&i| s.synthetic_mask[i]).collect(),
        parents: keep.iter().map(|&i| s.parents[i]).collect(),
        source_index: keep.iter().map(|&i| s.source_index[i]).collect(),
        removed_ids: (0..drop.len())
            .filter(|&i| drop[i])
            .map(|i| s.matrix.sample_ids()[i].clone())
            .collect(),
        warnings,
    })
}

/// Exact copies of uniformly chosen minority rows.
pub fn random_duplicate(
    m: &FeatureMatrix,
    cfg: &SamplerConfig,
) -> Result<SampledMatrix, SampleError> {
    cfg.validate()?;
    let minority = minority_rows(m);
    if minority.is_empty() {
        return Err(SampleError::TooFewMinority { have: 0, need: 1 });
    }
    let Some(g) = deficit(m, cfg.proportion) else {
        return Ok(nothing_to_do(m));
    };
    let mut rng = stream(cfg.seed, tag::SAMPLER, 0);
    let rows = (0..g)
        .map(|_| {
            let a = minority[rng.random_range(0..minority.len())];
            (m.row(a).to_vec(), (a, a))
        })
        .collect();
    assemble(m, rows, Vec::new())
}
