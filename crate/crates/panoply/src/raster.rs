//! Dense row-major rasters for panoramas, face views, and label masks.

use crate::error::{Error, Result};

/// An RGB color sample.
pub type Pixel = [u8; 3];

/// A dense row-major raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster<T> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

impl<T: Copy> Raster<T> {
    pub fn filled(width: u32, height: u32, value: T) -> Self {
        Raster {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<T>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::invalid_input(format!(
                "raster data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> T {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: T) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Mutable row slices, suitable for parallel fills.
    pub fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, T> {
        self.data.chunks_mut(self.width as usize)
    }

    pub fn same_dimensions<U: Copy>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// An equirectangular raster tagged with the frame it came from.
///
/// Full-sphere equirectangular: width = 2 × height, longitude along x,
/// latitude along y with row 0 at the zenith.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equirect<T> {
    pub frame_id: u64,
    raster: Raster<T>,
}

impl<T: Copy> Equirect<T> {
    pub fn new(frame_id: u64, raster: Raster<T>) -> Result<Self> {
        if raster.width() == 0 || raster.width() != raster.height() * 2 {
            return Err(Error::invalid_input(format!(
                "equirectangular raster must satisfy width = 2 x height, got {}x{}",
                raster.width(),
                raster.height()
            )));
        }
        Ok(Equirect { frame_id, raster })
    }

    pub fn raster(&self) -> &Raster<T> {
        &self.raster
    }

    pub fn raster_mut(&mut self) -> &mut Raster<T> {
        &mut self.raster
    }

    pub fn into_raster(self) -> Raster<T> {
        self.raster
    }

    pub fn width(&self) -> u32 {
        self.raster.width()
    }

    pub fn height(&self) -> u32 {
        self.raster.height()
    }
}
