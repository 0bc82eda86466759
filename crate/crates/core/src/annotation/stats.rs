use super::manifest::{load_split, DatasetManifest, Split};
use crate::error::Result;

/// Image and box counts of one split.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitStats {
    pub images: usize,
    /// Images without any box.
    pub background_images: usize,
    /// Box count per class id.
    pub boxes_per_class: Vec<usize>,
    /// Number of images containing at least one box of the class.
    pub images_per_class: Vec<usize>,
}

impl SplitStats {
    pub fn total_boxes(&self) -> usize {
        self.boxes_per_class.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetStats {
    pub splits: [SplitStats; 3],
}

impl DatasetStats {
    pub fn split(&self, split: Split) -> &SplitStats {
        &self.splits[split as usize]
    }

    pub fn total_images(&self) -> usize {
        self.splits.iter().map(|s| s.images).sum()
    }
}

/// Counts images and boxes per split and class.
pub fn dataset_stats(manifest: &DatasetManifest) -> Result<DatasetStats> {
    let n_classes = manifest.classes().len();
    let mut splits: [SplitStats; 3] = Default::default();
    for split in Split::ALL {
        let stats = &mut splits[split as usize];
        stats.boxes_per_class = vec![0; n_classes];
        stats.images_per_class = vec![0; n_classes];
        for item in load_split::<f64>(manifest.split_dir(split), manifest.classes())? {
            stats.images += 1;
            if item.boxes.is_empty() {
                stats.background_images += 1;
            }
            let mut present = vec![false; n_classes];
            for b in &item.boxes {
                stats.boxes_per_class[b.class_id()] += 1;
                present[b.class_id()] = true;
            }
            for (count, p) in stats.images_per_class.iter_mut().zip(present) {
                *count += usize::from(p);
            }
        }
    }
    Ok(DatasetStats { splits })
}
