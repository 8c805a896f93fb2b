import base64
import io
import json
import zlib
from pathlib import Path

import pytest
from PIL import Image

from conftest import asset, make_layout
from roomsynth.render import RenderOptions, encode_base64, encode_image, object_color, pixel_digest, png_bytes, render_topdown
from roomsynth.scene import Layout, Pose, Room, load_scene

GOLDEN = Path(__file__).parent / "fixtures" / "golden"
MANIFEST = json.loads((GOLDEN / "manifest.json").read_text())


def _options(doc):
    return RenderOptions(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()})


@pytest.mark.parametrize("entry", MANIFEST, ids=[e["name"] for e in MANIFEST])
def test_golden_bytes(entry):
    layout = load_scene(GOLDEN / f"{entry['name']}.json").layout()
    data = encode_image(render_topdown(layout, _options(entry["options"])))
    golden = (GOLDEN / f"{entry['name']}.png").read_bytes()
    # pixels first, so a zlib difference on some platform is told apart from a drawing change
    assert Image.open(io.BytesIO(data)).tobytes() == Image.open(io.BytesIO(golden)).tobytes()
    assert data == golden


def test_empty_room_is_floor_and_walls():
    opts = RenderOptions(long_side=256)
    img = render_topdown(Layout(Room(400, 300)), opts)
    colors = {c for _, c in img.getcolors(1 << 16)}
    assert colors == {opts.floor_color, opts.wall_color}
    assert max(img.size) == 256


def test_same_layout_same_bytes():
    layout = make_layout(Room(500, 400), (asset("sofa-0", 200, 90), Pose(250, 45, 0)))
    assert encode_image(render_topdown(layout)) == encode_image(render_topdown(layout))


def test_plus_y_is_up():
    opts = RenderOptions(long_side=256, show_labels=False)
    layout = make_layout(Room(400, 400), (asset("box-0", 40, 40), Pose(200, 360, 0)))
    img = render_topdown(layout, opts)
    color = object_color("box-0")
    rows = [y for y in range(img.size[1]) if color in [img.getpixel((x, y)) for x in range(img.size[0])]]
    assert max(rows) < img.size[1] // 2


def test_png_decodes_to_same_pixels(tmp_path):
    img = render_topdown(make_layout(Room(300, 300), (asset("a", 50, 70), Pose(100, 100, 90))))
    data = encode_image(img, tmp_path / "x.png")
    assert (tmp_path / "x.png").read_bytes() == data
    back = Image.open(io.BytesIO(data))
    assert back.mode == "RGB" and back.tobytes() == img.tobytes()
    assert pixel_digest(back.convert("RGB")) == pixel_digest(img)


def test_png_structure_is_fixed():
    data = png_bytes(Image.new("RGB", (3, 2), (1, 2, 3)))
    assert data.startswith(b"\x89PNG\r\n\x1a\n")
    assert [data[12:16], data[-8:-4]] == [b"IHDR", b"IEND"]
    idat = data[data.index(b"IDAT") + 4 : data.index(b"IEND") - 8]
    raw = zlib.decompress(idat)
    # every scanline uses filter 0
    assert raw[0] == 0 and raw[10] == 0


def test_base64_round_trip_and_stable_prefix():
    entry = MANIFEST[1]
    layout = load_scene(GOLDEN / f"{entry['name']}.json").layout()
    img = render_topdown(layout, _options(entry["options"]))
    b64 = encode_base64(img)
    assert base64.b64decode(b64) == png_bytes(img)
    golden = base64.b64encode((GOLDEN / f"{entry['name']}.png").read_bytes()).decode()
    assert b64[:64] == golden[:64]


def test_options_validate():
    with pytest.raises(ValueError):
        RenderOptions(long_side=100)
    with pytest.raises(ValueError):
        RenderOptions(grid_spacing=0)
