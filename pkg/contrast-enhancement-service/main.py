"""
Contrast Enhancement Service
Main entry point for the color contrast enhancement service
"""

from fastapi import FastAPI
import uvicorn
from api.enhancement import router as enhancement_router
from config import Config
import logging

# Configure logging
Config.setup_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Contrast Enhancement Service",
    description="Color contrast enhancement for optical see-through displays",
    version="1.0.0"
)

# Include API routes
app.include_router(enhancement_router, prefix="/api/v1", tags=["contrast-enhancement"])

@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "service": "contrast-enhancement"}

@app.get("/")
async def root():
    """Root endpoint"""
    return {"message": "Contrast Enhancement Service is running"}

if __name__ == "__main__":
    if not Config.validate_config():
        raise SystemExit(3)
    uvicorn.run(
        "main:app",
        host=Config.SERVICE_HOST,
        port=Config.SERVICE_PORT,
        reload=True,
        log_level=Config.LOG_LEVEL.lower()
    )
