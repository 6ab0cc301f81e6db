"""
URL configuration for the Adaptive-Gravity project.

Die Pipeline wird ausschließlich über ``python manage.py agrav`` bedient;
es gibt keine HTTP-Endpunkte.
"""

urlpatterns = []
