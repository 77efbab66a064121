"""Regenerates the committed fixture rasters. Run from this directory."""

from pathlib import Path

from PIL import Image, ImageDraw


def hero(path: Path) -> None:
    img = Image.new("RGB", (420, 260))
    px = img.load()
    for y in range(260):
        for x in range(420):
            px[x, y] = (40 + x * 120 // 420, 80 + y * 100 // 260, 150)
    draw = ImageDraw.Draw(img)
    draw.rectangle([150, 70, 270, 190], fill=(230, 200, 60))
    draw.ellipse([180, 100, 240, 160], fill=(180, 40, 40))
    img.save(path)


def chart(path: Path) -> None:
    img = Image.new("RGB", (300, 200), (245, 245, 240))
    draw = ImageDraw.Draw(img)
    bars = [60, 110, 85, 140, 95]
    for i, h in enumerate(bars):
        x0 = 20 + i * 54
        draw.rectangle([x0, 180 - h, x0 + 40, 180], fill=(50, 90 + i * 25, 160))
    draw.line([15, 180, 290, 180], fill=(30, 30, 30), width=2)
    img.save(path)


if __name__ == "__main__":
    out = Path(__file__).parent / "img"
    out.mkdir(exist_ok=True)
    hero(out / "hero.png")
    chart(out / "chart.png")
