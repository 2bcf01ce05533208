//! Fixed-length motion vectors from variable-length feature sequences.
//!
//! A recording's per-frame features are clustered with k-means (k depends on
//! the movement). The centroids, ordered by the mean frame position of their
//! members, concatenate into one vector of `k * 16` values. A recording can
//! also be expanded into a family of vectors built from the members nearest
//! each centroid.

pub mod kmeans;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, ClusterModel, DEFAULT_MAX_ITERS};

use crate::error::{Error, Result};
use crate::features::{encode_recording, FEATURE_COUNT, FEATURE_NAMES};
use crate::seed;
use crate::skeleton::{normalize_recording, AgeGroup, MotionRecording, MovementKind};

pub fn k_for_movement(m: MovementKind) -> usize {
    match m {
        MovementKind::ChairRise => 5,
        _ => 2,
    }
}

pub fn motion_vector_len(m: MovementKind) -> usize {
    k_for_movement(m) * FEATURE_COUNT
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionVector {
    pub values: Vec<f64>,
    pub label: AgeGroup,
    pub movement: MovementKind,
    pub subject_id: String,
}

impl MotionVector {
    /// Key shared by every vector derived from the same recording.
    pub fn group_key(&self) -> String {
        format!("{}/{}", self.subject_id, self.movement)
    }
}

/// Metadata attached to every vector derived from one recording.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub label: AgeGroup,
    pub movement: MovementKind,
    pub subject_id: String,
}

impl From<&MotionRecording> for Provenance {
    fn from(rec: &MotionRecording) -> Self {
        Provenance {
            label: rec.group,
            movement: rec.movement,
            subject_id: rec.subject_id.clone(),
        }
    }
}

/// Concatenates the centroids in time order.
pub fn centroid_motion_vector(model: &ClusterModel, meta: &Provenance) -> MotionVector {
    let values = model
        .cluster_order()
        .iter()
        .flat_map(|&c| model.centroids()[c].iter().copied())
        .collect();
    MotionVector {
        values,
        label: meta.label,
        movement: meta.movement,
        subject_id: meta.subject_id.clone(),
    }
}

/// Members of each cluster nearest their centroid, closest first, truncated
/// to the nearest half (rounded up). Indexed by cluster id.
pub fn kept_members<P: AsRef<[f64]>>(model: &ClusterModel, features: &[P]) -> Vec<Vec<usize>> {
    (0..model.k())
        .map(|c| {
            let centroid = &model.centroids()[c];
            let mut ranked: Vec<(f64, usize)> = model
                .members(c)
                .into_iter()
                .map(|i| (kmeans::sq_dist(features[i].as_ref(), centroid), i))
                .collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let keep = ranked.len().div_ceil(2);
            ranked.truncate(keep);
            ranked.into_iter().map(|(_, i)| i).collect()
        })
        .collect()
}

/// Expands one recording into `n` motion vectors, `n` being the smallest
/// kept-member count over clusters. Vector `i` concatenates, in time order,
/// the `i`-th closest kept member of every cluster.
pub fn expand_family<P: AsRef<[f64]>>(
    model: &ClusterModel,
    features: &[P],
    meta: &Provenance,
) -> Result<Vec<MotionVector>> {
    if features.len() != model.assignments().len() {
        return Err(Error::DimensionMismatch {
            expected: model.assignments().len(),
            actual: features.len(),
        });
    }
    let kept = kept_members(model, features);
    if let Some(c) = kept.iter().position(|m| m.is_empty()) {
        return Err(Error::EmptyCluster(c));
    }
    let n = kept.iter().map(Vec::len).min().unwrap_or(0);
    Ok((0..n)
        .map(|rank| MotionVector {
            values: model
                .cluster_order()
                .iter()
                .flat_map(|&c| features[kept[c][rank]].as_ref().iter().copied())
                .collect(),
            label: meta.label,
            movement: meta.movement,
            subject_id: meta.subject_id.clone(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentationConfig {
    /// Emit the near-centroid family instead of the single centroid vector.
    pub family: bool,
    /// Cluster on per-recording z-scored features. Emitted values stay in
    /// the original units.
    pub standardize_features: bool,
    pub max_iters: usize,
}

impl Default for RepresentationConfig {
    fn default() -> Self {
        RepresentationConfig {
            family: true,
            standardize_features: false,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

fn zscore(features: &[[f64; FEATURE_COUNT]]) -> Vec<[f64; FEATURE_COUNT]> {
    let n = features.len() as f64;
    let mut mean = [0.0; FEATURE_COUNT];
    for f in features {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v / n;
        }
    }
    let mut sd = [0.0; FEATURE_COUNT];
    for f in features {
        for ((s, v), m) in sd.iter_mut().zip(f).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    let sd = sd.map(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
    features
        .iter()
        .map(|f| std::array::from_fn(|d| (f[d] - mean[d]) / sd[d]))
        .collect()
}

/// Clusters a recording's feature sequence with the movement's k.
pub fn cluster_features(
    features: &[[f64; FEATURE_COUNT]],
    movement: MovementKind,
    cfg: &RepresentationConfig,
    seed: u64,
) -> Result<ClusterModel> {
    let k = k_for_movement(movement);
    if cfg.standardize_features {
        let z = zscore(features);
        let fitted = kmeans(&z, k, seed, cfg.max_iters)?;
        ClusterModel::from_assignments(features, fitted.assignments().to_vec(), k)
    } else {
        kmeans(features, k, seed, cfg.max_iters)
    }
}

/// Normalizes, encodes and clusters one recording, returning its motion
/// vectors. The k-means seed is derived from `root_seed` and the
/// recording's identity.
pub fn represent_recording(
    rec: &MotionRecording,
    cfg: &RepresentationConfig,
    root_seed: u64,
) -> Result<Vec<MotionVector>> {
    let normalized = normalize_recording(rec)?;
    let features: Vec<[f64; FEATURE_COUNT]> = encode_recording(&normalized)?
        .iter()
        .map(|f| f.to_array())
        .collect();
    let seed = seed::derive_keyed(root_seed, "kmeans", &rec.group_key());
    let model = cluster_features(&features, rec.movement, cfg, seed)?;
    let meta = Provenance::from(rec);
    if cfg.family {
        expand_family(&model, &features, &meta)
    } else {
        Ok(vec![centroid_motion_vector(&model, &meta)])
    }
}

fn value_columns(len: usize) -> Vec<String> {
    (0..len)
        .map(|i| format!("c{}_{}", i / FEATURE_COUNT, FEATURE_NAMES[i % FEATURE_COUNT]))
        .collect()
}

/// Writes motion vectors as CSV: `k*16` value columns named
/// `c{block}_{feature}`, then `label`, `movement`, `subject_id`.
/// All vectors must share one length.
pub fn write_motion_vectors_csv<W: Write>(out: W, vectors: &[MotionVector]) -> Result<()> {
    let len = vectors.first().map_or(0, |v| v.values.len());
    if let Some(v) = vectors.iter().find(|v| v.values.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            actual: v.values.len(),
        });
    }
    let err = |e: csv::Error| Error::Data(format!("writing motion vectors: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = value_columns(len);
    header.extend(["label", "movement", "subject_id"].map(String::from));
    w.write_record(&header).map_err(err)?;
    for v in vectors {
        let mut row: Vec<String> = v.values.iter().map(|x| x.to_string()).collect();
        row.push(v.label.label().to_string());
        row.push(v.movement.to_string());
        row.push(v.subject_id.clone());
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("writing motion vectors: {e}")))?;
    Ok(())
}

pub fn read_motion_vectors_csv<R: Read>(input: R) -> Result<Vec<MotionVector>> {
    let err = |e: csv::Error| Error::Data(format!("reading motion vectors: {e}"));
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(err)?.clone();
    let width = header.len();
    if width < 3 || &header[width - 3] != "label" || &header[width - 1] != "subject_id" {
        return Err(Error::Data(
            "motion vector CSV must end with label,movement,subject_id".into(),
        ));
    }
    let len = width - 3;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(err)?;
        let bad = |what: &str| Error::Data(format!("motion vector row {}: bad {what}", line + 1));
        let values = (0..len)
            .map(|i| rec[i].parse::<f64>().map_err(|_| bad("value")))
            .collect::<Result<Vec<_>>>()?;
        let label = rec[len]
            .parse::<u8>()
            .ok()
            .and_then(AgeGroup::from_label)
            .ok_or_else(|| bad("label"))?;
        out.push(MotionVector {
            values,
            label,
            movement: rec[len + 1].parse()?,
            subject_id: rec[len + 2].to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn meta() -> Provenance {
        Provenance {
            label: AgeGroup::Older,
            movement: MovementKind::Stand2FeetEyesOpen,
            subject_id: "S1".into(),
        }
    }

    #[test]
    fn k_per_movement() {
        assert_eq!(k_for_movement(MovementKind::ChairRise), 5);
        assert_eq!(k_for_movement(MovementKind::Stand2FeetEyesOpen), 2);
        assert_eq!(k_for_movement(MovementKind::Stand2FeetEyesClosed), 2);
        assert_eq!(k_for_movement(MovementKind::Balance1LegEyesOpen), 2);
        assert_eq!(k_for_movement(MovementKind::Balance1LegEyesClosed), 2);
    }

    fn two_phase(early: usize, late: usize) -> Vec<[f64; FEATURE_COUNT]> {
        let mut rng = crate::seed::rng(3);
        (0..early + late)
            .map(|i| {
                let base = if i < early { 1.0 } else { -1.0 };
                std::array::from_fn(|_| base + 0.01 * rng.random::<f64>())
            })
            .collect()
    }

    #[test]
    fn centroids_concatenate_in_time_order() {
        let f = two_phase(10, 14);
        let model = kmeans(&f, 2, 1, DEFAULT_MAX_ITERS).unwrap();
        let v = centroid_motion_vector(&model, &meta());
        assert_eq!(v.values.len(), 32);
        let early = &model.centroids()[model.assignments()[0]];
        let late = &model.centroids()[model.assignments()[23]];
        assert_eq!(&v.values[..16], early.as_slice());
        assert_eq!(&v.values[16..], late.as_slice());
        assert!(v.values[0] > 0.0 && v.values[16] < 0.0);
    }

    #[test]
    fn constant_sequence_blocks_equal_constant() {
        let f = vec![[0.25; FEATURE_COUNT]; 30];
        let model = kmeans(&f, 5, 9, DEFAULT_MAX_ITERS).unwrap();
        let v = centroid_motion_vector(&model, &meta());
        assert_eq!(v.values, vec![0.25; 80]);
    }

    #[test]
    fn family_size_is_min_kept() {
        // 8 and 13 members, keeping 4 and 7.
        let f = two_phase(8, 13);
        let model = kmeans(&f, 2, 1, DEFAULT_MAX_ITERS).unwrap();
        let fam = expand_family(&model, &f, &meta()).unwrap();
        assert_eq!(fam.len(), 4);
        let kept = kept_members(&model, &f);
        let sizes: Vec<usize> = kept.iter().map(Vec::len).collect();
        assert!(sizes.contains(&4) && sizes.contains(&7));
        // Rank 0 is the closest member of each cluster.
        let mut want = Vec::new();
        for &c in model.cluster_order() {
            let centroid = &model.centroids()[c];
            let closest = model
                .members(c)
                .into_iter()
                .min_by(|&a, &b| {
                    kmeans::sq_dist(&f[a], centroid).total_cmp(&kmeans::sq_dist(&f[b], centroid))
                })
                .unwrap();
            want.extend_from_slice(&f[closest]);
        }
        assert_eq!(fam[0].values, want);
        assert!(fam.iter().all(|v| v.label == AgeGroup::Older && v.values.len() == 32));
    }

    #[test]
    fn family_members_within_median_distance() {
        let mut rng = crate::seed::rng(8);
        let f: Vec<[f64; FEATURE_COUNT]> = (0..61)
            .map(|i| {
                let base = if i < 30 { 0.0 } else { 3.0 };
                std::array::from_fn(|_| base + rng.random::<f64>())
            })
            .collect();
        let model = kmeans(&f, 2, 4, DEFAULT_MAX_ITERS).unwrap();
        let fam = expand_family(&model, &f, &meta()).unwrap();
        for (block, &c) in model.cluster_order().iter().enumerate() {
            let centroid = &model.centroids()[c];
            let dist = |p: &[f64]| -> f64 {
                p.iter().zip(centroid).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            };
            let mut all: Vec<f64> = model.members(c).iter().map(|&i| dist(&f[i])).collect();
            all.sort_by(f64::total_cmp);
            let median = all[(all.len() - 1) / 2];
            for v in &fam {
                let d = dist(&v.values[block * 16..(block + 1) * 16]);
                assert!(d <= median + 1e-12);
            }
        }
    }

    #[test]
    fn standardized_clustering_reports_raw_centroids() {
        let f = two_phase(12, 12);
        let cfg = RepresentationConfig {
            standardize_features: true,
            ..Default::default()
        };
        let model = cluster_features(&f, MovementKind::Stand2FeetEyesOpen, &cfg, 5).unwrap();
        for c in 0..2 {
            let members = model.members(c);
            for d in 0..FEATURE_COUNT {
                let mean = members.iter().map(|&i| f[i][d]).sum::<f64>() / members.len() as f64;
                assert!((model.centroids()[c][d] - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = two_phase(6, 6);
        let model = kmeans(&f, 2, 1, DEFAULT_MAX_ITERS).unwrap();
        let fam = expand_family(&model, &f, &meta()).unwrap();
        let mut buf = Vec::new();
        write_motion_vectors_csv(&mut buf, &fam).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("c0_euclid_spine_head,"));
        assert!(text.lines().next().unwrap().ends_with("c1_spine_shoulder_y,label,movement,subject_id"));
        let back = read_motion_vectors_csv(buf.as_slice()).unwrap();
        assert_eq!(back, fam);
    }

    proptest! {
        #[test]
        fn centroid_blocks_are_member_means(n in 10usize..60, seed in 0u64..1000) {
            let mut rng = crate::seed::rng(seed);
            let f: Vec<[f64; FEATURE_COUNT]> =
                (0..n).map(|_| std::array::from_fn(|_| rng.random::<f64>())).collect();
            let model = kmeans(&f, 2, seed, DEFAULT_MAX_ITERS).unwrap();
            let v = centroid_motion_vector(&model, &meta());
            for (block, &c) in model.cluster_order().iter().enumerate() {
                let members = model.members(c);
                for d in 0..FEATURE_COUNT {
                    let mean = members.iter().map(|&i| f[i][d]).sum::<f64>() / members.len() as f64;
                    let got = v.values[block * FEATURE_COUNT + d];
                    prop_assert!((got - mean).abs() <= 1e-9 * mean.abs().max(1.0));
                }
            }
        }

        #[test]
        fn family_count_bounds(n in 10usize..80, k in 1usize..6, seed in 0u64..1000) {
            prop_assume!(n >= k);
            let mut rng = crate::seed::rng(seed);
            let f: Vec<[f64; FEATURE_COUNT]> =
                (0..n).map(|_| std::array::from_fn(|_| rng.random::<f64>())).collect();
            let model = kmeans(&f, k, seed, DEFAULT_MAX_ITERS).unwrap();
            let fam = expand_family(&model, &f, &meta()).unwrap();
            prop_assert!(!fam.is_empty());
            prop_assert!(fam.len() <= n / (2 * k) + 1);
            prop_assert!(fam.iter().all(|v| v.values.len() == k * FEATURE_COUNT));
        }
    }
}
