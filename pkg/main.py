from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
import os
from contextlib import asynccontextmanager
from dotenv import load_dotenv

# Загружаем переменные окружения
load_dotenv()

from app.database.database import init_archive
from app.core.config import get_settings
from app.core.logging import setup_logging
from app.api.v1 import cores, surgery, verify, oracle, runs

# Создаем таблицы архива запусков
init_archive()

setup_logging(get_settings().log_level)

@asynccontextmanager
async def lifespan(app: FastAPI):
    # Запуск приложения
    print("🚀 Core Surgery Server is starting...")
    yield
    # Остановка приложения
    print("🛑 Core Surgery Server is shutting down...")

app = FastAPI(
    title="Core Surgery API",
    description="API для построения ядер Гирарделя свободных расщеплений, хирургий и проверки сопровождения путей",
    version="1.0.0",
    lifespan=lifespan
)

# Настройка CORS
allowed_origins = os.getenv("ALLOWED_ORIGINS", "*")
if allowed_origins == "*":
    allow_origins_list = ["*"]
else:
    allow_origins_list = [origin.strip() for origin in allowed_origins.split(",")]

app.add_middleware(
    CORSMiddleware,
    allow_origins=allow_origins_list,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Подключаем роуты API
api_prefix = "/api/v1"

app.include_router(cores.router, prefix=f"{api_prefix}/cores", tags=["cores"])
app.include_router(surgery.router, prefix=f"{api_prefix}/surgery", tags=["surgery"])
app.include_router(verify.router, prefix=f"{api_prefix}/verify", tags=["verify"])
app.include_router(oracle.router, prefix=f"{api_prefix}/oracle", tags=["oracle"])
app.include_router(runs.router, prefix=f"{api_prefix}/runs", tags=["runs"])

@app.get("/")
def root():
    """Корневой эндпоинт"""
    return {
        "message": "Welcome to Core Surgery API",
        "version": "1.0.0",
        "docs": "/docs",
        "redoc": "/redoc",
        "endpoints": {
            "cores": {
                "validate": f"{api_prefix}/cores/validate",
                "build": f"{api_prefix}/cores/build",
                "rectangles": f"{api_prefix}/cores/rectangles"
            },
            "surgery": f"{api_prefix}/surgery/sequence",
            "verify": {
                "fellow_traveling": f"{api_prefix}/verify/fellow-traveling",
                "theorem2": f"{api_prefix}/verify/theorem2"
            },
            "oracle": f"{api_prefix}/oracle/core",
            "runs": f"{api_prefix}/runs/"
        }
    }

@app.get("/health")
def health_check():
    """Проверка здоровья сервера"""
    return {"status": "healthy", "service": "Core Surgery API"}

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        reload=True,
        log_level="info"
    )
