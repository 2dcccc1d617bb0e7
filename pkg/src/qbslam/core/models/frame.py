"""Frame value type: one flattened, normalised observation of the stream."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qbslam.exceptions.models import InvalidFrameError


@dataclass(frozen=True, eq=False)
class Frame:
    """
    One observation s̄_k of the video stream.

    Pixels are stored flattened row-major, scaled to [0, 1]. Grayscale frames have
    N = width·height; RGB frames (``channels=3``) interleave channels per pixel,
    N = 3·width·height.
    """

    index: int
    timestamp: float
    pixels: np.ndarray
    width: int
    height: int
    channels: int = 1

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InvalidFrameError(f'Frame size must be positive, got {self.width}x{self.height}', self.index)
        if self.channels not in {1, 3}:
            raise InvalidFrameError(f'Frames have 1 or 3 channels, got {self.channels}', self.index)
        if not np.isfinite(self.timestamp):
            raise InvalidFrameError(f'Frame {self.index} has a non-finite timestamp', self.index)

        pixels = np.array(self.pixels, dtype=np.float64).reshape(-1)
        expected = self.width * self.height * self.channels
        if pixels.size != expected:
            raise InvalidFrameError(
                f'Frame {self.index}: {pixels.size} pixels for a {self.width}x{self.height}x{self.channels} image',
                self.index,
            )
        if not np.all(np.isfinite(pixels)):
            raise InvalidFrameError(f'Frame {self.index} contains non-finite pixels', self.index)
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise InvalidFrameError(f'Frame {self.index} pixels must lie in [0, 1]', self.index)

        pixels.setflags(write=False)
        object.__setattr__(self, 'pixels', pixels)

    @property
    def n(self) -> int:
        """Input dimension N."""
        return self.pixels.size

    @classmethod
    def from_image(cls, index: int, timestamp: float, image: np.ndarray) -> Frame:
        """
        Build a frame from an ``(h, w)`` or ``(h, w, 3)`` image.

        ``uint8`` images are scaled by 1/255; floating images must already be in [0, 1].
        """
        image = np.asarray(image)
        if image.ndim not in {2, 3} or (image.ndim == 3 and image.shape[2] != 3):
            raise InvalidFrameError(f'Unsupported image shape {image.shape}', index)
        scaled = image.astype(np.float64) / 255.0 if image.dtype == np.uint8 else image.astype(np.float64)
        channels = 1 if image.ndim == 2 else 3
        return cls(
            index=index,
            timestamp=float(timestamp),
            pixels=scaled.reshape(-1),
            width=image.shape[1],
            height=image.shape[0],
            channels=channels,
        )

    def image(self) -> np.ndarray:
        """Return the pixels reshaped to ``(h, w)`` or ``(h, w, 3)``."""
        if self.channels == 1:
            return self.pixels.reshape(self.height, self.width)
        return self.pixels.reshape(self.height, self.width, self.channels)

    def __repr__(self) -> str:
        return f'Frame(k={self.index}, t={self.timestamp:.3f}, {self.width}x{self.height}x{self.channels})'
