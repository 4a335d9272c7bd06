//! Shape corpus: the bundled set and loading from a directory.
//!
//! Files whose stem starts with `training` hold practice shapes; they are
//! kept out of the test sequence.

use std::path::{Path, PathBuf};

use crate::geometry::{Shape, ShapeError};

const BUNDLED: [(&str, &str); 11] = [
    ("arrow", include_str!("../assets/shapes/arrow.json")),
    ("hexagon", include_str!("../assets/shapes/hexagon.json")),
    ("house", include_str!("../assets/shapes/house.json")),
    ("l-shape", include_str!("../assets/shapes/l-shape.json")),
    ("parallelogram", include_str!("../assets/shapes/parallelogram.json")),
    ("pentagon", include_str!("../assets/shapes/pentagon.json")),
    ("rectangle", include_str!("../assets/shapes/rectangle.json")),
    ("square", include_str!("../assets/shapes/square.json")),
    (
        "training-diamond",
        include_str!("../assets/shapes/training-diamond.json"),
    ),
    ("trapezoid", include_str!("../assets/shapes/trapezoid.json")),
    ("triangle", include_str!("../assets/shapes/triangle.json")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub shape: Shape,
    pub training: bool,
}

/// Ten test shapes and one training shape, sorted by file stem.
pub fn bundled() -> Vec<CorpusEntry> {
    BUNDLED
        .iter()
        .map(|(stem, text)| CorpusEntry {
            shape: Shape::from_json(text).expect("bundled shape is valid"),
            training: is_training_stem(stem),
        })
        .collect()
}

pub fn bundled_shape(name: &str) -> Option<Shape> {
    bundled().into_iter().map(|e| e.shape).find(|s| s.name() == name)
}

fn is_training_stem(stem: &str) -> bool {
    stem.starts_with("training")
}

/// Loads every `*.json` file in `dir`, sorted by file name.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, ShapeError> {
    let dir = dir.as_ref();
    let io_err = |source| ShapeError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(CorpusEntry {
                shape: Shape::load(&path)?,
                training: is_training_stem(&stem),
            })
        })
        .collect()
}
