//! Metrics and resampling: R², ROC/AUC, deterministic k-fold plans.
//!
//! AUC is the Mann-Whitney rank statistic (ties get half credit), which
//! equals the trapezoidal area under the tie-collapsed ROC curve.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// `1 - SS_res / SS_tot`; can be negative. Errors on constant `y`.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: y_hat.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 observations".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(v, p)| (v - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// One point per distinct score, swept from +inf; starts (0,0), ends (1,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(threshold, fpr, tpr)` triples in descending threshold order.
    pub points: Vec<(f64, f64, f64)>,
}

impl RocCurve {
    pub fn trapezoid_area(&self) -> f64 {
        let mut area = 0.0;
        for w in self.points.windows(2) {
            let (_, x0, y0) = w[0];
            let (_, x1, y1) = w[1];
            area += (x1 - x0) * (y0 + y1) / 2.0;
        }
        area
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["threshold", "fpr", "tpr"])?;
        for (t, fpr, tpr) in &self.points {
            out.write_record([format!("{t}"), format!("{fpr}"), format!("{tpr}")])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Standalone SVG: fixed 800x800 viewBox, axes, diagonal reference.
    pub fn to_svg(&self, title: &str) -> String {
        let margin = 60.0;
        let span = 680.0;
        let px = |v: f64| margin + v * span;
        let py = |v: f64| 800.0 - margin - v * span;
        let path: Vec<String> = self
            .points
            .iter()
            .map(|(_, fpr, tpr)| format!("{:.2},{:.2}", px(*fpr), py(*tpr)))
            .collect();
        format!(
            concat!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">\n",
                "  <rect width=\"800\" height=\"800\" fill=\"white\"/>\n",
                "  <text x=\"400\" y=\"30\" text-anchor=\"middle\" font-size=\"20\">{title}</text>\n",
                "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
                "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{m}\" y2=\"{t}\" stroke=\"black\"/>\n",
                "  <line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{t}\" stroke=\"gray\" stroke-dasharray=\"6,6\"/>\n",
                "  <text x=\"400\" y=\"785\" text-anchor=\"middle\" font-size=\"16\">false positive rate</text>\n",
                "  <text x=\"20\" y=\"400\" text-anchor=\"middle\" font-size=\"16\" transform=\"rotate(-90 20 400)\">true positive rate</text>\n",
                "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"{points}\"/>\n",
                "</svg>\n"
            ),
            title = title,
            m = margin,
            b = 800.0 - margin,
            r = margin + span,
            t = margin,
            points = path.join(" ")
        )
    }
}

/// ROC curve and AUC. Errors unless both classes are present.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<(RocCurve, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite score".into()));
    }

    // AUC from average ranks (ascending scores)
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j averaged over the tie group
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let auc =
        (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64);

    // curve: descending sweep with tie groups collapsed
    let mut points = vec![(f64::INFINITY, 0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = order.len();
    while i > 0 {
        let score = scores[order[i - 1]];
        let mut j = i;
        while j > 0 && scores[order[j - 1]] == score {
            let idx = order[j - 1];
            if labels[idx] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j -= 1;
        }
        points.push((score, fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        i = j;
    }
    Ok((RocCurve { points }, auc))
}

/// Deterministic fold assignment; folds partition rows with sizes
/// differing by at most one (per class when stratified).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub stratified: bool,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded_rng(seed));
    order
}

/// Seeded shuffle then round-robin. Pass labels to stratify: the
/// round-robin counter runs on within each class so per-fold class counts
/// also differ by at most one.
pub fn kfold(n: usize, k: usize, seed: u64, labels: Option<&[u8]>) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    if let Some(labels) = labels {
        if labels.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: labels.len(),
            });
        }
    }
    let mut assignments = vec![0usize; n];
    match labels {
        None => {
            for (slot, idx) in shuffled_indices(n, seed).into_iter().enumerate() {
                assignments[idx] = slot % k;
            }
        }
        Some(labels) => {
            let order = shuffled_indices(n, seed);
            let mut counter = 0usize;
            for class in [1u8, 0u8] {
                for &idx in order.iter().filter(|&&i| labels[i] == class) {
                    assignments[idx] = counter % k;
                    counter += 1;
                }
            }
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        stratified: labels.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_squared_hand_cases() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&y, &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r_squared(&y, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        // SS_res = 1, SS_tot = 2
        assert_eq!(r_squared(&y, &[1.0, 2.0, 2.0]).unwrap(), 0.5);
        assert!(matches!(
            r_squared(&[5.0, 5.0], &[1.0, 2.0]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn auc_hand_cases() {
        let (_, auc) = roc_auc(&[0.9, 0.8, 0.7, 0.1], &[1, 0, 1, 0]).unwrap();
        assert_eq!(auc, 0.75);

        // perfectly separated
        let (_, auc) = roc_auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(auc, 1.0);

        // all ties
        let (_, auc) = roc_auc(&[0.5, 0.5, 0.5, 0.5], &[1, 0, 1, 0]).unwrap();
        assert_eq!(auc, 0.5);

        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[1, 1]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn curve_shape_and_trapezoid_equivalence() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(23);
        for _ in 0..100 {
            let n = rng.gen_range(4..60);
            let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..8) as f64) / 8.0).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let (curve, auc) = roc_auc(&scores, &labels).unwrap();
            let first = curve.points.first().unwrap();
            let last = curve.points.last().unwrap();
            assert_eq!((first.1, first.2), (0.0, 0.0));
            assert_eq!((last.1, last.2), (1.0, 1.0));
            for w in curve.points.windows(2) {
                assert!(w[1].1 >= w[0].1 && w[1].2 >= w[0].2, "non-monotone curve");
            }
            assert!((curve.trapezoid_area() - auc).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_symmetry_and_monotone_invariance() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(31);
        for _ in 0..50 {
            let n = rng.gen_range(4..40);
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let (_, auc) = roc_auc(&scores, &labels).unwrap();
            let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
            let (_, auc_neg) = roc_auc(&negated, &labels).unwrap();
            assert!((auc + auc_neg - 1.0).abs() < 1e-12);

            let transformed: Vec<f64> = scores.iter().map(|s| s.exp() * 3.0 + 1.0).collect();
            let (_, auc_t) = roc_auc(&transformed, &labels).unwrap();
            assert!((auc - auc_t).abs() < 1e-12);
        }
    }

    #[test]
    fn kfold_sizes_and_partition() {
        let plan = kfold(10, 5, 0, None).unwrap();
        for fold in 0..5 {
            assert_eq!(plan.test_indices(fold).len(), 2);
        }

        let plan = kfold(7, 3, 1, None).unwrap();
        let mut sizes: Vec<usize> = (0..3).map(|f| plan.test_indices(f).len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);

        // partition: disjoint test folds covering every row
        let mut seen = vec![false; 7];
        for fold in 0..3 {
            for idx in plan.test_indices(fold) {
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));

        assert!(kfold(3, 5, 0, None).is_err());
        assert!(kfold(5, 1, 0, None).is_err());
    }

    #[test]
    fn stratified_positive_counts_exact() {
        let labels: Vec<u8> = (0..1000).map(|i| u8::from(i % 5 == 0)).collect(); // 20%
        let plan = kfold(1000, 10, 7, Some(&labels)).unwrap();
        for fold in 0..10 {
            let test = plan.test_indices(fold);
            let pos = test.iter().filter(|&&i| labels[i] == 1).count();
            assert_eq!(pos, 20);
            assert_eq!(test.len(), 100);
        }
    }

    #[test]
    fn fold_plans_deterministic() {
        let a = kfold(100, 7, 9, None).unwrap();
        let b = kfold(100, 7, 9, None).unwrap();
        assert_eq!(a, b);
        let c = kfold(100, 7, 10, None).unwrap();
        assert_ne!(a.assignments, c.assignments);
    }

    #[test]
    fn roc_csv_and_svg_render() {
        let (curve, _) = roc_auc(&[0.9, 0.8, 0.7, 0.1], &[1, 0, 1, 0]).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("threshold,fpr,tpr\n"));
        assert_eq!(text.lines().count(), 1 + curve.points.len());

        let svg = curve.to_svg("roc");
        assert!(svg.contains("<svg"));
        assert!(svg.contains("polyline"));
    }
}
