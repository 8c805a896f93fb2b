"""Top-down raster of a layout with byte-stable PNG output.

Only integer box fills and unantialiased lines are drawn, labels use the
embedded 5x7 bitmap font below, and PNG encoding is done here with fixed
zlib settings, so identical layouts give identical bytes.
"""

from __future__ import annotations

import base64
import hashlib
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, ImageDraw

from .geometry import footprint, front_center
from .scene import Layout

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class RenderOptions:
    long_side: int = 1024
    show_labels: bool = True
    show_grid: bool = False
    grid_spacing: float = 50.0
    floor_color: RGB = (150, 105, 65)
    wall_color: RGB = (255, 255, 255)
    outline_color: RGB = (20, 20, 20)
    grid_color: RGB = (170, 130, 95)
    wall_px: int = 16

    def __post_init__(self) -> None:
        if self.long_side < 256:
            raise ValueError("long_side must be at least 256 pixels")
        if self.grid_spacing <= 0:
            raise ValueError("grid_spacing must be positive")


def object_color(name: str) -> RGB:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    # keep fills in a mid band so outlines and labels stay visible
    return tuple(90 + b % 140 for b in digest[:3])  # type: ignore[return-value]


# 5x7 glyphs, one string per row, '#' = ink
_GLYPHS = {
    "A": (" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"),
    "B": ("#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "),
    "C": (" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "),
    "D": ("#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "),
    "E": ("#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"),
    "F": ("#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "),
    "G": (" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"),
    "H": ("#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"),
    "I": (" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "),
    "J": ("  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "),
    "K": ("#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"),
    "L": ("#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"),
    "M": ("#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"),
    "N": ("#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"),
    "O": (" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "),
    "P": ("#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "),
    "Q": (" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"),
    "R": ("#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"),
    "S": (" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "),
    "T": ("#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "),
    "U": ("#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "),
    "V": ("#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "),
    "W": ("#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "),
    "X": ("#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"),
    "Y": ("#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "),
    "Z": ("#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"),
    "0": (" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "),
    "1": ("  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "),
    "2": (" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"),
    "3": ("#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "),
    "4": ("   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "),
    "5": ("#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "),
    "6": ("  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "),
    "7": ("#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "),
    "8": (" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "),
    "9": (" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "),
    "-": ("     ", "     ", "     ", "#####", "     ", "     ", "     "),
    "_": ("     ", "     ", "     ", "     ", "     ", "     ", "#####"),
    ".": ("     ", "     ", "     ", "     ", "     ", " ##  ", " ##  "),
    "'": ("  #  ", "  #  ", " #   ", "     ", "     ", "     ", "     "),
    " ": ("     ",) * 7,
}
_UNKNOWN = ("#####", "#   #", "#   #", "#   #", "#   #", "#   #", "#####")


def text_size(text: str, scale: int) -> tuple[int, int]:
    return (len(text) * 6 * scale - scale if text else 0, 7 * scale)


def draw_text(draw: ImageDraw.ImageDraw, xy: tuple[int, int], text: str, color: RGB, scale: int = 1) -> None:
    x0, y0 = xy
    for i, ch in enumerate(text.upper()):
        glyph = _GLYPHS.get(ch, _UNKNOWN)
        for row, bits in enumerate(glyph):
            for col, bit in enumerate(bits):
                if bit == "#":
                    px = x0 + (i * 6 + col) * scale
                    py = y0 + row * scale
                    draw.rectangle((px, py, px + scale - 1, py + scale - 1), fill=color)


class _Frame:
    """Room centimeters to pixels, with +Y pointing up the image."""

    def __init__(self, layout: Layout, options: RenderOptions):
        room = layout.room
        m = options.wall_px
        self.margin = m
        self.depth = room.depth
        self.scale = (options.long_side - 2 * m) / max(room.width, room.depth)
        self.size = (
            int(round(room.width * self.scale)) + 2 * m,
            int(round(room.depth * self.scale)) + 2 * m,
        )

    def px(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(round(self.margin + x * self.scale)),
            int(round(self.margin + (self.depth - y) * self.scale)),
        )


def render_topdown(layout: Layout, options: RenderOptions = RenderOptions()) -> Image.Image:
    frame = _Frame(layout, options)
    img = Image.new("RGB", frame.size, options.wall_color)
    draw = ImageDraw.Draw(img)
    room = layout.room
    x0, y0 = frame.px(0, room.depth)
    x1, y1 = frame.px(room.width, 0)
    draw.rectangle((x0, y0, x1 - 1, y1 - 1), fill=options.floor_color)

    if options.show_grid:
        k = 1
        while k * options.grid_spacing < room.width:
            gx, _ = frame.px(k * options.grid_spacing, 0)
            draw.line((gx, y0, gx, y1 - 1), fill=options.grid_color, width=1)
            k += 1
        k = 1
        while k * options.grid_spacing < room.depth:
            _, gy = frame.px(0, k * options.grid_spacing)
            draw.line((x0, gy, x1 - 1, gy), fill=options.grid_color, width=1)
            k += 1

    label_scale = max(1, options.long_side // 512)
    for name, (asset, pose) in layout:
        r = footprint(asset, pose)
        ax, ay = frame.px(r.min_x, r.max_y)
        bx, by = frame.px(r.max_x, r.min_y)
        draw.rectangle((ax, ay, max(ax, bx - 1), max(ay, by - 1)), fill=object_color(name), outline=options.outline_color)
        cx, cy = frame.px(pose.x, pose.y)
        fx, fy = frame.px(*front_center(asset, pose))
        draw.line((cx, cy, fx, fy), fill=options.outline_color, width=max(1, label_scale + 1))
        draw.rectangle((cx - label_scale, cy - label_scale, cx + label_scale, cy + label_scale), fill=options.outline_color)
        if options.show_labels:
            tw, th = text_size(name, label_scale)
            tx = min(max(cx - tw // 2, 0), frame.size[0] - tw)
            ty = min(max(cy + 2 * label_scale + 2, 0), frame.size[1] - th)
            draw_text(draw, (tx, ty), name, options.outline_color, label_scale)
    return img


def _chunk(tag: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)


def png_bytes(img: Image.Image) -> bytes:
    """8-bit RGB PNG, filter type 0 on every row, zlib level 9."""
    img = img.convert("RGB")
    w, h = img.size
    raw = img.tobytes()
    stride = w * 3
    scan = b"".join(b"\x00" + raw[i * stride : (i + 1) * stride] for i in range(h))
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(scan, 9))
        + _chunk(b"IEND", b"")
    )


def encode_image(img: Image.Image, path: str | Path | None = None) -> bytes:
    """PNG bytes of ``img``; also written to ``path`` when given."""
    data = png_bytes(img)
    if path is not None:
        Path(path).write_bytes(data)
    return data


def encode_base64(img: Image.Image) -> str:
    return base64.b64encode(png_bytes(img)).decode("ascii")


def pixel_digest(img: Image.Image) -> str:
    return hashlib.sha256(img.tobytes()).hexdigest()[:16]
