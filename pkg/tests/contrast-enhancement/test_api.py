"""
Test cases for the Contrast Enhancement Service API
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

# Add the project root to Python path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

service_dir = project_root / "contrast-enhancement-service"
sys.path.insert(0, str(service_dir))

from main import app
from models.enhancer import METHODS
from utils.fixtures import synthetic_backgrounds, white_text_scene
from utils.raster import decode_image, encode_png

client = TestClient(app)

WIDTH, HEIGHT = 40, 30
TEXT_PIXELS = int(np.count_nonzero(white_text_scene(WIDTH, HEIGHT).alpha))


def upload_files(background="yellow"):
    virtual = encode_png(white_text_scene(WIDTH, HEIGHT))
    bg = encode_png(synthetic_backgrounds(WIDTH, HEIGHT)[background])
    return {
        "virtual": ("virtual.png", virtual, "image/png"),
        "background": ("background.png", bg, "image/png"),
    }


class TestContrastEnhancementAPI:
    """Test cases for the HTTP surface"""

    def test_health_endpoint(self):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "healthy", "service": "contrast-enhancement"}

    def test_root_endpoint(self):
        response = client.get("/")
        assert response.status_code == 200
        assert "Contrast Enhancement Service is running" in response.json()["message"]

    def test_methods_endpoint(self):
        response = client.get("/api/v1/methods")
        assert response.status_code == 200
        data = response.json()
        assert data["methods"] == list(METHODS)
        assert data["defaults"]["lambda_e"] == 0.4

    def test_enhance_returns_png(self):
        response = client.post("/api/v1/enhance", files=upload_files(), data={"method": "ours"})
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        assert float(response.headers["x-enhanced-percent"]) > 0.0
        assert int(response.headers["x-foreground-pixels"]) == TEXT_PIXELS

        display = decode_image(response.content)
        assert (display.width, display.height) == (WIDTH, HEIGHT)
        np.testing.assert_array_equal(display.alpha, white_text_scene(WIDTH, HEIGHT).alpha)

    def test_enhance_none_returns_input(self):
        response = client.post("/api/v1/enhance", files=upload_files(), data={"method": "none"})
        assert response.status_code == 200
        assert float(response.headers["x-enhanced-percent"]) == 0.0
        np.testing.assert_array_equal(decode_image(response.content).pixels, white_text_scene(WIDTH, HEIGHT).pixels)

    def test_evaluate_returns_report(self):
        response = client.post("/api/v1/evaluate", files=upload_files("blue"), data={"method": "ours", "lambda_e": "0.6"})
        assert response.status_code == 200
        data = response.json()
        assert 0.0 < data["enhanced_percent"] <= 100.0
        assert data["methods"]["ours"]["foreground_pixel_count"] == TEXT_PIXELS
        assert data["parameters"]["lambda_e"] == 0.6
        assert data["frames"] == ["background.png"]
        assert "total" in data["timing"]

    @pytest.mark.parametrize("endpoint", ["/api/v1/enhance", "/api/v1/evaluate"])
    def test_unknown_method(self, endpoint):
        response = client.post(endpoint, files=upload_files(), data={"method": "sharpen"})
        assert response.status_code == 400

    @pytest.mark.parametrize("field, value", [("lambda_e", "-1"), ("blur_kernel", "4"), ("attenuation", "2"), ("fov", "1,2")])
    def test_invalid_parameters(self, field, value):
        response = client.post("/api/v1/evaluate", files=upload_files(), data={field: value})
        assert response.status_code == 400

    def test_non_image_upload(self):
        files = upload_files()
        files["background"] = ("notes.txt", b"not an image", "text/plain")
        response = client.post("/api/v1/enhance", files=files)
        assert response.status_code == 400

    def test_garbage_image_bytes(self):
        files = upload_files()
        files["virtual"] = ("virtual.png", b"garbage", "image/png")
        response = client.post("/api/v1/enhance", files=files)
        assert response.status_code == 400

    def test_missing_background(self):
        files = upload_files()
        del files["background"]
        response = client.post("/api/v1/enhance", files=files)
        assert response.status_code == 422
