from django.conf import settings
from django.contrib import admin
from django.urls import path

# The lab has no HTTP surface beyond the admin, where recorded runs can be browsed.
urlpatterns = [
    path(settings.ADMIN_URL, admin.site.urls),
]
