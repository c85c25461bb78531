"""
Contrast Enhancement API Routes
Handles API endpoints for enhancing and evaluating uploaded frames
"""

import asyncio
import logging
import sys
from functools import partial
from pathlib import Path
from typing import Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from fastapi.responses import Response
from pydantic import ValidationError

# Add parent directory to Python path for imports
current_dir = Path(__file__).parent.parent
sys.path.insert(0, str(current_dir))

from config import Config, parse_fov
from models.baselines import SubtractionParams
from models.contrast_optimizer import EnhanceParams
from models.enhancer import METHODS, ContrastEnhancer, EnhancementResult
from models.evaluator import MetricsReport
from utils.image_preprocessor import BlurParams, FovMapping
from utils.raster import RasterImage, decode_image, encode_png

logger = logging.getLogger(__name__)

router = APIRouter()

MAX_UPLOAD_BYTES = 20 * 1024 * 1024


async def _read_image(upload: UploadFile, role: str) -> RasterImage:
    if upload.content_type and not upload.content_type.startswith("image/"):
        raise HTTPException(status_code=400, detail=f"{role} must be an image")
    data = await upload.read()
    if len(data) > MAX_UPLOAD_BYTES:
        raise HTTPException(status_code=400, detail=f"{role} too large (max 20MB)")
    try:
        return decode_image(data)
    except (OSError, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"Invalid {role}: {e}")


def _build_enhancer(
    lambda_e: Optional[float],
    jnd: Optional[float],
    blur_kernel: Optional[int],
    blur_sigma: Optional[float],
    attenuation: Optional[float],
    fov: Optional[str],
) -> ContrastEnhancer:
    jnd = Config.JND if jnd is None else jnd
    return ContrastEnhancer(
        params=EnhanceParams.from_unscaled_jnd(jnd, lambda_e=Config.LAMBDA_E if lambda_e is None else lambda_e),
        blur=BlurParams(
            kernel_size=Config.BLUR_KERNEL if blur_kernel is None else blur_kernel,
            sigma=Config.BLUR_SIGMA if blur_sigma is None else blur_sigma,
        ),
        mapping=FovMapping.from_tuple(parse_fov(fov) if fov else Config.fov_tuple()),
        attenuation=Config.ATTENUATION if attenuation is None else attenuation,
        subtraction=SubtractionParams(k_v=Config.SUBTRACT_K_V, k_b=Config.SUBTRACT_K_B),
        jnd=jnd,
        workers=Config.WORKERS,
    )


async def _run(enhancer: ContrastEnhancer, virtual: RasterImage, background: RasterImage, method: str) -> EnhancementResult:
    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(None, partial(enhancer.run, virtual, background, method))


@router.post("/enhance")
async def enhance_frame_endpoint(
    virtual: UploadFile = File(...),
    background: UploadFile = File(...),
    method: str = Form("ours"),
    lambda_e: Optional[float] = Form(None),
    jnd: Optional[float] = Form(None),
    blur_kernel: Optional[int] = Form(None),
    blur_sigma: Optional[float] = Form(None),
    attenuation: Optional[float] = Form(None),
    fov: Optional[str] = Form(None),
):
    """
    Enhance a virtual frame against a background capture; returns the display PNG
    """
    try:
        logger.info(f"Enhancing '{virtual.filename}' over '{background.filename}' with method {method}")
        if method not in METHODS:
            raise HTTPException(status_code=400, detail=f"Unknown method '{method}'")

        enhancer = _build_enhancer(lambda_e, jnd, blur_kernel, blur_sigma, attenuation, fov)
        virtual_img = await _read_image(virtual, "virtual image")
        background_img = await _read_image(background, "background image")
        result = await _run(enhancer, virtual_img, background_img, method)

        return Response(
            content=encode_png(result.display),
            media_type="image/png",
            headers={
                "X-Enhanced-Percent": f"{result.metrics.enhanced_percent:.4f}",
                "X-Foreground-Pixels": str(result.metrics.foreground_pixel_count),
            },
        )

    except HTTPException:
        raise
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid enhancement request: {str(e)}")
        raise HTTPException(status_code=400, detail=f"Invalid parameters: {str(e)}")
    except Exception as e:
        logger.error(f"Error during enhancement: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Enhancement failed: {str(e)}")


@router.post("/evaluate", response_model=MetricsReport)
async def evaluate_frame_endpoint(
    virtual: UploadFile = File(...),
    background: UploadFile = File(...),
    method: str = Form("ours"),
    lambda_e: Optional[float] = Form(None),
    jnd: Optional[float] = Form(None),
    blur_kernel: Optional[int] = Form(None),
    blur_sigma: Optional[float] = Form(None),
    attenuation: Optional[float] = Form(None),
    fov: Optional[str] = Form(None),
):
    """
    Enhance a virtual frame and return its metrics report
    """
    try:
        if method not in METHODS:
            raise HTTPException(status_code=400, detail=f"Unknown method '{method}'")

        enhancer = _build_enhancer(lambda_e, jnd, blur_kernel, blur_sigma, attenuation, fov)
        virtual_img = await _read_image(virtual, "virtual image")
        background_img = await _read_image(background, "background image")
        result = await _run(enhancer, virtual_img, background_img, method)

        report = MetricsReport.from_methods(
            [result.metrics],
            frames=[background.filename or "background"],
            parameters={"method": method, **enhancer.describe()},
            timing=result.timing,
        )
        logger.info(f"Evaluation result: {report.enhanced_percent:.2f}% enhanced ({method})")
        return report

    except HTTPException:
        raise
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid evaluation request: {str(e)}")
        raise HTTPException(status_code=400, detail=f"Invalid parameters: {str(e)}")
    except Exception as e:
        logger.error(f"Error during evaluation: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Evaluation failed: {str(e)}")


@router.get("/methods")
async def get_methods():
    """
    Get available rendering methods
    """
    return {
        "methods": list(METHODS),
        "default": Config.METHOD,
        "defaults": {
            "lambda_e": Config.LAMBDA_E,
            "jnd": Config.JND,
            "blur_kernel": Config.BLUR_KERNEL,
            "blur_sigma": Config.BLUR_SIGMA,
            "attenuation": Config.ATTENUATION,
            "fov": Config.FOV,
        },
    }
