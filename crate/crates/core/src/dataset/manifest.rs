//! `path,label,split` manifests.
//!
//! Paths are resolved relative to the manifest's directory. A row with an empty label
//! becomes its own singleton class, which is how an unlabeled training set is expressed.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::{ColorImage, Dataset, LabeledSample, TrainingSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestRow {
    pub path: String,
    pub label: String,
    pub split: Split,
}

pub fn read_rows(path: &Path) -> Result<Vec<ManifestRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let expected = ["path", "label", "split"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Manifest(format!(
            "{}: header must be `path,label,split`, got `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::Manifest(format!("{}: {e}", path.display()))))
        .collect()
}

/// Decodes every referenced image and splits into a training set and held-out list.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let rows = read_rows(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let decoded: Vec<(Split, LabeledSample)> = rows
        .par_iter()
        .enumerate()
        .map(|(idx, row)| {
            let file: PathBuf = base.join(&row.path);
            let image = ColorImage::read(&file)?.into_matrix();
            let label = if row.label.is_empty() {
                format!("#{idx}")
            } else {
                row.label.clone()
            };
            Ok((row.split, LabeledSample::new(image, label, row.path.clone())?))
        })
        .collect::<Result<_>>()?;

    let (train, test): (Vec<_>, Vec<_>) = decoded.into_iter().partition(|(s, _)| *s == Split::Train);
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let train = TrainingSet::new(train.into_iter().map(|(_, s)| s).collect())?;
    let test: Vec<LabeledSample> = test.into_iter().map(|(_, s)| s).collect();
    for s in &test {
        train.check(s)?;
    }
    Ok(Dataset { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::pnm::{encode, PnmImage, PnmKind};

    fn write_ppm(dir: &Path, name: &str, w: usize, h: usize, v: u8) {
        let img = PnmImage {
            kind: PnmKind::Rgb,
            width: w,
            height: h,
            data: vec![v; w * h * 3],
        };
        std::fs::write(dir.join(name), encode(&img)).unwrap();
    }

    #[test]
    fn two_classes_three_images_each() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = String::from("path,label,split\r\n");
        for (c, label) in ["alice", "bob"].iter().enumerate() {
            for s in 0..3 {
                let name = format!("{label}{s}.ppm");
                write_ppm(dir.path(), &name, 4, 3, (c * 50 + s) as u8);
                csv += &format!("{name},{label},train\r\n");
            }
        }
        write_ppm(dir.path(), "q.ppm", 4, 3, 7);
        csv += "q.ppm,alice,test\r\n";
        std::fs::write(dir.path().join("m.csv"), csv).unwrap();
        let ds = load_manifest(&dir.path().join("m.csv")).unwrap();
        assert_eq!(ds.train.class_count(), 2);
        assert_eq!(ds.train.len(), 6);
        assert_eq!(ds.test.len(), 1);
        assert_eq!(ds.train.dims(), (3, 4));
    }

    #[test]
    fn inconsistent_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        write_ppm(dir.path(), "a.ppm", 4, 3, 1);
        write_ppm(dir.path(), "b.ppm", 3, 3, 1);
        std::fs::write(
            dir.path().join("m.csv"),
            "path,label,split\na.ppm,x,train\nb.ppm,y,train\n",
        )
        .unwrap();
        let err = load_manifest(&dir.path().join("m.csv")).unwrap_err();
        assert!(err.to_string().contains("inconsistent dimensions"), "{err}");
    }

    #[test]
    fn missing_file_and_empty_train_split() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.csv"), "path,label,split\nnope.ppm,x,train\n").unwrap();
        assert!(matches!(
            load_manifest(&dir.path().join("m.csv")),
            Err(Error::File { .. })
        ));
        write_ppm(dir.path(), "a.ppm", 2, 2, 1);
        std::fs::write(dir.path().join("t.csv"), "path,label,split\na.ppm,x,test\n").unwrap();
        assert!(matches!(
            load_manifest(&dir.path().join("t.csv")),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn bad_header_and_split() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.csv"), "file,label,split\n").unwrap();
        assert!(matches!(load_manifest(&dir.path().join("m.csv")), Err(Error::Manifest(_))));
        std::fs::write(dir.path().join("s.csv"), "path,label,split\na.ppm,x,validate\n").unwrap();
        assert!(matches!(load_manifest(&dir.path().join("s.csv")), Err(Error::Manifest(_))));
    }

    #[test]
    fn empty_labels_become_singleton_classes() {
        let dir = tempfile::tempdir().unwrap();
        write_ppm(dir.path(), "a.ppm", 2, 2, 1);
        write_ppm(dir.path(), "b.ppm", 2, 2, 9);
        std::fs::write(
            dir.path().join("m.csv"),
            "path,label,split\na.ppm,,train\nb.ppm,,train\n",
        )
        .unwrap();
        let ds = load_manifest(&dir.path().join("m.csv")).unwrap();
        assert_eq!(ds.train.class_sizes(), vec![1, 1]);
    }
}
