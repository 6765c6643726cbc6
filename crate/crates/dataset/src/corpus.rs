//! Directory-per-class corpus discovery.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{DatasetError, Result};

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// A class named after its directory. Names of the form `Disease(Crop)` are
/// split into their parts; anything else is taken as the crop name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub index: usize,
    pub name: String,
    pub crop: String,
    pub disease: String,
}

impl ClassLabel {
    pub fn from_name(index: usize, name: &str) -> Self {
        let (crop, disease) = match (name.rfind('('), name.strip_suffix(')')) {
            (Some(open), Some(inner)) if open > 0 => {
                (inner[open + 1..].trim(), name[..open].trim())
            }
            _ => (name.trim(), ""),
        };
        ClassLabel {
            index,
            name: name.to_string(),
            crop: crop.to_string(),
            disease: disease.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledFile {
    pub path: PathBuf,
    /// Path relative to the corpus root with `/` separators.
    pub relative: String,
    pub label: usize,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub classes: Vec<ClassLabel>,
    pub files: Vec<LabeledFile>,
}

impl Corpus {
    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn files_in(&self, label: usize) -> impl Iterator<Item = &LabeledFile> {
        self.files.iter().filter(move |f| f.label == label)
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn is_hidden(name: &std::ffi::OsStr) -> bool {
    name.to_str().is_some_and(|n| n.starts_with('.'))
}

/// Each immediate subdirectory of `root` is a class; image files anywhere
/// below it belong to that class.
pub fn scan_corpus(root: &Path) -> Result<Corpus> {
    let mut class_dirs = Vec::new();
    for entry in std::fs::read_dir(root).map_err(DatasetError::io(root))? {
        let entry = entry.map_err(DatasetError::io(root))?;
        let path = entry.path();
        if path.is_dir() && !is_hidden(&entry.file_name()) {
            let name = entry.file_name().into_string().map_err(|n| {
                DatasetError::InvalidConfig(format!("class directory {n:?} is not UTF-8"))
            })?;
            class_dirs.push((name, path));
        }
    }
    if class_dirs.is_empty() {
        return Err(DatasetError::NoClasses(root.to_path_buf()));
    }
    class_dirs.sort();

    let mut classes = Vec::with_capacity(class_dirs.len());
    let mut files = Vec::new();
    for (index, (name, dir)) in class_dirs.into_iter().enumerate() {
        let mut found = Vec::new();
        for entry in WalkDir::new(&dir)
            .follow_links(true)
            .into_iter()
            .filter_entry(|e| !is_hidden(e.file_name()))
        {
            let entry = entry.map_err(|e| DatasetError::Io {
                path: dir.clone(),
                source: e.into(),
            })?;
            if entry.file_type().is_file() && is_image(entry.path()) {
                found.push(entry.into_path());
            }
        }
        found.sort();
        if found.is_empty() {
            log::warn!("class {name:?} has no image files");
        }
        for path in found {
            let relative = path
                .strip_prefix(root)
                .unwrap_or(&path)
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            files.push(LabeledFile {
                path,
                relative,
                label: index,
            });
        }
        classes.push(ClassLabel::from_name(index, &name));
    }
    Ok(Corpus {
        root: root.to_path_buf(),
        classes,
        files,
    })
}
