# plda-adapt
# PLDA 도메인 적응 백엔드
