"""Regenerates the externally encoded JPEG fixture corpus.

Every `*.jpg` here is written by libjpeg (through Pillow), never by this
repository's encoder. The matching `*.ref.png` is the same file decoded by
`refdecode.c` against the system libjpeg with its floating-point IDCT, and
`*.ycc.png` holds the upsampled Y, Cb, Cr samples of that decode before
colour conversion. `*.islow.png` is the same decode with libjpeg's default
integer IDCT.
`progressive.jpg` is a deliberately unsupported (progressive) file.

`self_encoded/*.jpg` are produced by this repository's encoder (rewrite them
with `DCTPIPE_BLESS=1 cargo test -p dctpipe-core --test interop`); this script
only adds libjpeg's `*.ycc.png` decodes next to them.

Requires Pillow, scikit-image (for its bundled sample photographs), a C
compiler and libjpeg development headers.
"""

import io
import os
import subprocess
import tempfile

import numpy as np
import skimage.data as data
from PIL import Image

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "external")
REFDECODE = os.path.join(tempfile.gettempdir(), "dctpipe-refdecode")


def crop(arr, y, x, h, w):
    return Image.fromarray(np.ascontiguousarray(arr[y : y + h, x : x + w]))


def save(name, img, **kw):
    buf = io.BytesIO()
    img.save(buf, "JPEG", **kw)
    raw = buf.getvalue()
    path = os.path.join(OUT, name + ".jpg")
    with open(path, "wb") as f:
        f.write(raw)
    reference_decodes(path, (("float", ".ref.png"), ("float-ycc", ".ycc.png"), ("islow", ".islow.png")))


def reference_decodes(path, methods):
    stem = path[: -len(".jpg")]
    for method, suffix in methods:
        with tempfile.NamedTemporaryFile(suffix=".pnm") as tmp:
            subprocess.run([REFDECODE, method, path, tmp.name], check=True)
            Image.open(tmp.name).save(stem + suffix)


def main():
    os.makedirs(OUT, exist_ok=True)
    subprocess.run(["cc", "-O2", "-o", REFDECODE, os.path.join(HERE, "refdecode.c"), "-ljpeg"], check=True)
    astro = data.astronaut()
    coffee = data.coffee()
    chelsea = data.chelsea()
    rocket = data.rocket()
    ihc = data.immunohistochemistry()
    wheel = data.colorwheel()
    camera = data.camera()
    moon = data.moon()

    cases = [
        ("astronaut_q75_420", crop(astro, 0, 128, 128, 128), dict(quality=75, subsampling=2)),
        ("astronaut_q95_444", crop(astro, 64, 160, 96, 96), dict(quality=95, subsampling=0)),
        ("astronaut_q50_422", crop(astro, 200, 200, 80, 112), dict(quality=50, subsampling=1)),
        ("coffee_q85_420", crop(coffee, 100, 200, 120, 160), dict(quality=85, subsampling=2)),
        ("coffee_q30_444", crop(coffee, 50, 50, 64, 64), dict(quality=30, subsampling=0)),
        ("coffee_odd_q90_420", crop(coffee, 10, 300, 53, 37), dict(quality=90, subsampling=2)),
        ("chelsea_q80_420_opt", crop(chelsea, 60, 120, 128, 144), dict(quality=80, subsampling=2, optimize=True)),
        ("chelsea_q70_444_opt", crop(chelsea, 120, 200, 72, 88), dict(quality=70, subsampling=0, optimize=True)),
        ("chelsea_odd_q60_422", crop(chelsea, 0, 0, 41, 67), dict(quality=60, subsampling=1)),
        ("rocket_q90_420", crop(rocket, 100, 250, 112, 96), dict(quality=90, subsampling=2)),
        ("rocket_q98_444", crop(rocket, 200, 300, 48, 64), dict(quality=98, subsampling=0)),
        ("ihc_q75_420_rst", crop(ihc, 100, 100, 96, 128), dict(quality=75, subsampling=2, restart_marker_blocks=3)),
        ("ihc_q88_444_rst", crop(ihc, 300, 300, 64, 80), dict(quality=88, subsampling=0, restart_marker_rows=1)),
        ("ihc_odd_q40_420", crop(ihc, 0, 0, 29, 31), dict(quality=40, subsampling=2)),
        ("wheel_q85_420", crop(wheel, 120, 120, 128, 128), dict(quality=85, subsampling=2)),
        ("wheel_q10_444", crop(wheel, 100, 100, 64, 72), dict(quality=10, subsampling=0)),
        ("camera_gray_q75", crop(camera, 100, 200, 96, 96), dict(quality=75)),
        ("camera_gray_odd_q92", crop(camera, 0, 0, 45, 59), dict(quality=92)),
        ("moon_gray_q60_rst", crop(moon, 200, 200, 64, 64), dict(quality=60, restart_marker_blocks=5)),
        ("astronaut_tiny_q75_420", crop(astro, 30, 190, 8, 8), dict(quality=75, subsampling=2)),
        ("astronaut_1px_q75", crop(astro, 30, 190, 1, 1), dict(quality=75, subsampling=0)),
        ("coffee_wide_q82_420", crop(coffee, 300, 0, 16, 240), dict(quality=82, subsampling=2)),
        ("chelsea_tall_q77_444", crop(chelsea, 0, 300, 200, 24), dict(quality=77, subsampling=0)),
        ("rocket_q65_420_opt_rst", crop(rocket, 0, 0, 80, 80), dict(quality=65, subsampling=2, optimize=True, restart_marker_rows=2)),
    ]
    for name, img, kw in cases:
        save(name, img, **kw)

    own = os.path.join(HERE, "self_encoded")
    for name in sorted(os.listdir(own)):
        if name.endswith(".jpg"):
            reference_decodes(os.path.join(own, name), (("float-ycc", ".ycc.png"),))

    buf = io.BytesIO()
    crop(astro, 0, 0, 32, 32).save(buf, "JPEG", quality=75, progressive=True)
    with open(os.path.join(HERE, "progressive.jpg"), "wb") as f:
        f.write(buf.getvalue())

    # Lossless natural test images for quality/PSNR regression pins. The
    # decimated copy is aliased and therefore harder to compress.
    Image.fromarray(astro).save(os.path.join(HERE, "astronaut_512.png"), optimize=True)
    Image.fromarray(np.ascontiguousarray(astro[0:256:2, 96:352:2])).save(
        os.path.join(HERE, "astronaut_128.png")
    )


if __name__ == "__main__":
    main()
