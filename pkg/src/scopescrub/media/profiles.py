"""Output encoding profiles."""

from dataclasses import dataclass

from scopescrub.errors import ValidationError


@dataclass
class OutputProfile:
    """Target stream parameters for standardization and full re-encodes.

    `quality` is the encoder's constant-quality factor (CRF for the x264
    family; lower is better). Audio is dropped by default because voices
    are identifying.
    """

    width: int = 1280
    height: int = 720
    fps: float = 25.0
    video_codec: str = "libx264"
    quality: int = 23
    drop_audio: bool = True

    def validate(self):
        if self.width < 2 or self.height < 2 or self.width % 2 or self.height % 2:
            raise ValidationError("profile width/height must be even and >= 2")
        if not (1.0 < self.fps <= 240.0):
            raise ValidationError("profile fps must be in (1, 240]")
        if not self.video_codec:
            raise ValidationError("profile video_codec must be set")
        return self

    def to_dict(self):
        return {
            "width": self.width,
            "height": self.height,
            "fps": self.fps,
            "video_codec": self.video_codec,
            "quality": self.quality,
            "drop_audio": self.drop_audio,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            width=int(d.get("width", 1280)),
            height=int(d.get("height", 720)),
            fps=float(d.get("fps", 25.0)),
            video_codec=d.get("video_codec", "libx264"),
            quality=int(d.get("quality", 23)),
            drop_audio=bool(d.get("drop_audio", True)),
        ).validate()
